mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use railgen::dataset::{
    augment, build_dataset_report, read_manifest, AnomalySpec, AnomalyType, Augmentation, DatasetError, Label,
    MANIFEST_FILE,
};
use railgen::imagecore::{read_image, write_image};
use railgen::{build_dataset, BuildConfig, Manifest, RgbImage};

fn config(input: &Path, output: &Path, total: u64, anomaly_type: AnomalyType) -> BuildConfig {
    BuildConfig {
        total,
        anomaly_type,
        input_dir: input.to_path_buf(),
        output_dir: output.to_path_buf(),
        master_seed: 42,
        jobs: Some(4),
        ..BuildConfig::default()
    }
}

fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn check_records(manifest: &Manifest, out: &Path) {
    for r in &manifest.records {
        assert!(r.is_consistent(), "{r:?}");
        assert_eq!(r.label == Label::Healthy, r.spec.is_none());
        read_image(out.join(&r.file)).unwrap();
    }
}

#[test]
fn balanced_round_robin_build() {
    let tmp = tempfile::tempdir().unwrap();
    let (input, output) = (tmp.path().join("in"), tmp.path().join("out"));
    fs::create_dir(&input).unwrap();
    common::write_frames(&input, 5, 800, 480, 1);

    let cfg = config(&input, &output, 20, AnomalyType::Vegetation);
    let report = build_dataset_report(&cfg).unwrap();
    assert!(report.skipped.is_empty(), "{:?}", report.skipped);
    let m = &report.manifest;
    assert_eq!((m.count(Label::Healthy), m.count(Label::Anomaly)), (10, 10));
    for (i, r) in m.records.iter().enumerate() {
        assert_eq!(r.source_file, format!("frame_{:02}.png", (i / 2) % 5));
        assert_eq!(r.label == Label::Healthy, i % 2 == 0);
        assert!(r.file.starts_with(&format!("{i:05}_")));
    }
    check_records(m, &output);
    assert_eq!(read_manifest(output.join(MANIFEST_FILE)).unwrap(), *m);
    // exactly the images plus the manifest
    assert_eq!(fs::read_dir(&output).unwrap().count(), 21);
}

#[test]
fn builds_are_byte_identical_regardless_of_threads() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    fs::create_dir(&input).unwrap();
    common::write_frames(&input, 5, 800, 480, 2);

    let mut a = config(&input, &tmp.path().join("a"), 12, AnomalyType::SunKink);
    a.jobs = Some(1);
    let mut b = config(&input, &tmp.path().join("b"), 12, AnomalyType::SunKink);
    b.jobs = Some(3);
    assert_eq!(build_dataset(&a).unwrap(), build_dataset(&b).unwrap());
    assert_eq!(dir_contents(&a.output_dir), dir_contents(&b.output_dir));
}

#[test]
fn master_seed_changes_specs() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    fs::create_dir(&input).unwrap();
    common::write_frames(&input, 5, 800, 480, 3);

    let specs: Vec<Vec<Option<AnomalySpec>>> = (0..5)
        .map(|seed| {
            let mut cfg = config(&input, &tmp.path().join(format!("o{seed}")), 4, AnomalyType::Vegetation);
            cfg.master_seed = seed;
            build_dataset(&cfg)
                .unwrap()
                .records
                .into_iter()
                .map(|r| r.spec)
                .collect()
        })
        .collect();
    for i in 0..specs.len() {
        for j in i + 1..specs.len() {
            assert_ne!(specs[i], specs[j]);
        }
    }
}

#[test]
fn every_anomaly_type_builds() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    fs::create_dir(&input).unwrap();
    common::write_frames(&input, 5, 800, 480, 4);

    for ty in [AnomalyType::SunKink, AnomalyType::MissingRail, AnomalyType::BrokenRail] {
        let out = tmp.path().join(ty.as_str());
        let m = build_dataset(&config(&input, &out, 10, ty)).unwrap();
        check_records(&m, &out);
        for r in m.records.iter().filter(|r| r.label == Label::Anomaly) {
            assert_eq!(r.anomaly_type, ty);
            assert_eq!(r.spec.as_ref().unwrap().anomaly_type(), ty);
        }
    }
}

#[test]
fn roi_crops_have_roi_size() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    fs::create_dir(&input).unwrap();
    common::write_frames(&input, 5, 800, 480, 5);

    let mut cfg = config(&input, &tmp.path().join("out"), 10, AnomalyType::Vegetation);
    cfg.emit_roi_crops = true;
    cfg.flip_probability = 1.0;
    let m = build_dataset(&cfg).unwrap();
    for r in &m.records {
        assert!(r.augmentations.contains(&Augmentation::Flip));
        let img = read_image(cfg.output_dir.join(&r.file)).unwrap();
        assert_eq!((img.width(), img.height()), (600, 300));
    }
}

#[test]
fn undetectable_frames_are_skipped_not_labeled() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    fs::create_dir(&input).unwrap();
    common::write_frames(&input, 2, 800, 480, 6);
    write_image(
        &RgbImage::filled(800, 480, [90, 90, 90]).unwrap(),
        input.join("blank.png"),
    )
    .unwrap();
    fs::write(input.join("notes.txt"), "ignored").unwrap();
    fs::write(input.join("broken.ppm"), "P6\n").unwrap();

    let report = build_dataset_report(&config(&input, &tmp.path().join("out"), 8, AnomalyType::Vegetation)).unwrap();
    let mut skipped: Vec<&str> = report.skipped.iter().map(|s| s.name.as_str()).collect();
    skipped.sort();
    assert_eq!(skipped, ["blank.png", "broken.ppm"]);
    assert!(report
        .manifest
        .records
        .iter()
        .all(|r| r.source_file.starts_with("frame_")));
}

#[test]
fn only_undetectable_frames_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    write_image(
        &RgbImage::filled(800, 480, [90, 90, 90]).unwrap(),
        tmp.path().join("blank.png"),
    )
    .unwrap();
    let err = build_dataset(&config(tmp.path(), &tmp.path().join("out"), 2, AnomalyType::Vegetation)).unwrap_err();
    assert!(matches!(err, DatasetError::NoUsableInputs(_)));
}

#[test]
fn augment_matches_definition() {
    let img = RgbImage::from_raw(3, 1, vec![0, 100, 255, 10, 20, 30, 250, 5, 128]).unwrap();
    let out = augment(&img, true, 10);
    assert_eq!(out.as_raw(), &[255, 15, 138, 20, 30, 40, 10, 110, 255]);
    assert_eq!(augment(&augment(&img, true, 0), true, 0), img);
}

#[test]
fn config_json_with_partial_fields() {
    let cfg: BuildConfig = serde_json::from_str(
        r#"{
            "total": 500,
            "anomaly_type": "vegetation",
            "input_dir": "frames",
            "output_dir": "dataset",
            "master_seed": 1,
            "brightness_delta_range": [-40, 40],
            "flip_probability": 0.5,
            "vegetation": {"level": "high"}
        }"#,
    )
    .unwrap();
    assert_eq!(cfg.vegetation.level, railgen::vegsim::VegetationLevel::High);
    assert_eq!(cfg.detect_config, railgen::DetectConfig::default());
    cfg.validate().unwrap();
    assert!(serde_json::from_str::<BuildConfig>(r#"{"totl": 4}"#).is_err());
}
