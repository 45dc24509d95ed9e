use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use railgen::dataset::{build_dataset_report, AnomalySpec, BuildConfig, MANIFEST_FILE};
use railgen::imagecore::{read_image, write_image};
use railgen::kinksim::{
    simulate_broken_rail, simulate_missing_rail, simulate_sun_kink, BreakSpec, KinkRequest, KinkStyle, RailSide,
};
use railgen::trackdetect::detect_track_traced;
use railgen::vegsim;
use railgen::{detect_track, DetectConfig, RgbImage, TrackGeometry, VegetationConfig};

use crate::args::{BuildArgs, DetectArgs, KinkArgs, Variant, VegetationArgs};
use crate::debug;
use crate::failure::Failure;
use crate::log;

fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("reading {what} {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{what} {}: {e}", path.display())))
}

fn config_or_default<T: DeserializeOwned + Default>(path: Option<&Path>, what: &str) -> Result<T, Failure> {
    path.map_or_else(|| Ok(T::default()), |p| read_json(p, what))
}

/// Pretty JSON with a trailing newline; `-` writes to stdout.
fn write_json(path: &Path, value: &impl Serialize) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Usage(e.to_string()))?;
    text.push('\n');
    if path == Path::new("-") {
        std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io(format!("stdout: {e}")))
    } else {
        fs::write(path, text).map_err(|e| Failure::Io(format!("writing {}: {e}", path.display())))
    }
}

fn load_frame(path: &Path) -> Result<RgbImage, Failure> {
    Ok(read_image(path)?)
}

fn save_frame(img: &RgbImage, path: &Path) -> Result<(), Failure> {
    Ok(write_image(img, path)?)
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

pub fn detect(args: &DetectArgs) -> Result<(), Failure> {
    let mut cfg: DetectConfig = config_or_default(args.config.as_deref(), "detect config")?;
    if let Some(v) = args.canny_low {
        cfg.canny_low = v;
    }
    if let Some(v) = args.canny_high {
        cfg.canny_high = v;
    }
    if let Some(v) = args.hough_votes {
        cfg.hough_votes = v;
    }
    if let Some(v) = args.roi_w {
        cfg.roi_w = v;
    }
    if let Some(v) = args.roi_h {
        cfg.roi_h = v;
    }
    if args.prior_roi.is_some() {
        cfg.prior_roi = args.prior_roi;
    }
    cfg.validate()?;

    let img = load_frame(&args.input)?;
    let geometry = match &args.debug_dir {
        None => detect_track(&img, &cfg)?,
        Some(dir) => {
            let trace = detect_track_traced(&img, &cfg)?;
            fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("creating {}: {e}", dir.display())))?;
            save_frame(&debug::edge_image(&trace.edges), &dir.join("edges.png"))?;
            save_frame(&debug::hough_overlay(&img, &trace), &dir.join("hough.png"))?;
            log::info(&[("event", "debug_written"), ("dir", &path_str(dir))]);
            trace.geometry.map_err(Failure::Usage)?
        }
    };
    write_json(&args.out_geometry, &geometry)?;
    log::info(&[
        ("event", "detected"),
        ("input", &path_str(&args.input)),
        ("vanishing_x", &format!("{:.2}", geometry.vanishing_point.x)),
        ("vanishing_y", &format!("{:.2}", geometry.vanishing_point.y)),
        (
            "roi",
            &format!(
                "{},{},{},{}",
                geometry.roi.x, geometry.roi.y, geometry.roi.w, geometry.roi.h
            ),
        ),
    ]);
    Ok(())
}

pub fn simulate_vegetation(args: &VegetationArgs) -> Result<(), Failure> {
    let mut cfg: VegetationConfig = config_or_default(args.config.as_deref(), "vegetation config")?;
    if let Some(level) = args.level {
        cfg.level = level.into();
    }
    cfg.validate()?;
    let geometry: TrackGeometry = read_json(&args.geometry, "geometry")?;
    let img = load_frame(&args.input)?;

    let (out, blobs) = vegsim::simulate_vegetation(&img, &geometry, &cfg, args.seed)?;
    save_frame(&out, &args.out)?;
    let n_blobs = blobs.len().to_string();
    if let Some(p) = &args.out_spec {
        write_json(p, &AnomalySpec::Vegetation(blobs))?;
    }
    log::info(&[
        ("event", "vegetation"),
        ("seed", &args.seed.to_string()),
        ("blobs", &n_blobs),
        ("out", &path_str(&args.out)),
    ]);
    Ok(())
}

pub fn simulate_kink(args: &KinkArgs) -> Result<(), Failure> {
    let style: KinkStyle = config_or_default(args.config.as_deref(), "kink config")?;
    style.validate()?;
    let pinned_kink_only = args.amplitude.is_some() || args.direction.is_some();
    if pinned_kink_only && !matches!(args.variant, Variant::Kink) {
        return Err(Failure::Usage(
            "--amplitude and --direction apply only to --variant kink".into(),
        ));
    }
    if (args.t0.is_some() || args.t1.is_some()) && matches!(args.variant, Variant::Missing) {
        return Err(Failure::Usage("--t0 and --t1 do not apply to --variant missing".into()));
    }
    let geometry: TrackGeometry = read_json(&args.geometry, "geometry")?;
    let img = load_frame(&args.input)?;
    let rail = args.rail.map(|s| s.rail());

    let (out, spec) = match args.variant {
        Variant::Kink => {
            let request = KinkRequest {
                t0: args.t0,
                t1: args.t1,
                amplitude: args.amplitude,
                direction: args.direction.map(|d| d.direction()),
                rail,
            };
            let (out, spec) = simulate_sun_kink(&img, &geometry, &request, &style, args.seed)?;
            (out, AnomalySpec::SunKink(spec))
        }
        Variant::Missing => {
            let rail = rail.unwrap_or_else(|| RailSide::from_seed(args.seed));
            (
                simulate_missing_rail(&img, &geometry, rail, &style)?,
                AnomalySpec::MissingRail { rail },
            )
        }
        Variant::Broken => {
            let mut spec = BreakSpec::random(&style, rail, args.seed);
            if let Some(t0) = args.t0 {
                spec.t0 = t0;
            }
            if let Some(t1) = args.t1 {
                spec.t1 = t1;
            }
            (
                simulate_broken_rail(&img, &geometry, &spec, &style)?,
                AnomalySpec::BrokenRail(spec),
            )
        }
    };
    save_frame(&out, &args.out)?;
    if let Some(p) = &args.out_spec {
        write_json(p, &spec)?;
    }
    log::info(&[
        ("event", "rail_anomaly"),
        ("type", spec.anomaly_type().as_str()),
        ("seed", &args.seed.to_string()),
        ("out", &path_str(&args.out)),
    ]);
    Ok(())
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn build_dataset(args: &BuildArgs) -> Result<(), Failure> {
    let mut cfg: BuildConfig = read_json(&args.config, "build config")?;
    let base = args.config.parent().unwrap_or(Path::new("."));
    cfg.input_dir = resolve(base, &cfg.input_dir);
    cfg.output_dir = resolve(base, &cfg.output_dir);
    if args.emit_roi_crops {
        cfg.emit_roi_crops = true;
    }
    if let Some(j) = args.jobs {
        cfg.jobs = Some(j as usize);
    }
    if let Some(s) = args.seed {
        cfg.master_seed = s;
    }
    cfg.validate()?;

    let report = build_dataset_report(&cfg)?;
    for s in &report.skipped {
        log::warn(&[("event", "frame_skipped"), ("file", &s.name), ("reason", &s.reason)]);
    }
    log::info(&[
        ("event", "dataset_built"),
        ("samples", &report.manifest.records.len().to_string()),
        ("skipped_frames", &report.skipped.len().to_string()),
        ("roi_crops", &cfg.emit_roi_crops.to_string()),
        ("manifest", &path_str(&cfg.output_dir.join(MANIFEST_FILE))),
    ]);
    Ok(())
}
