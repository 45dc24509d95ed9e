use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use railgen::kinksim::{KinkDirection, RailSide};
use railgen::vegsim::VegetationLevel;
use railgen::Rect;

#[derive(Debug, Parser)]
#[command(
    name = "railgen",
    version,
    about = "Detect railway track geometry and inject track anomalies"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find the two rails, their vanishing point and the region of interest.
    Detect(DetectArgs),
    /// Paint vegetation blobs into the region of interest.
    SimulateVegetation(VegetationArgs),
    /// Kink, remove or break one rail.
    SimulateKink(KinkArgs),
    /// Build a balanced, labeled dataset with a manifest.
    BuildDataset(BuildArgs),
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Detection config (JSON); flags below override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Input frame (.png or .ppm).
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write the geometry JSON; `-` for stdout.
    #[arg(long)]
    pub out_geometry: PathBuf,
    /// Dump the edge map and a Hough-line overlay here.
    #[arg(long)]
    pub debug_dir: Option<PathBuf>,
    /// Search only inside this window, given as x,y,w,h.
    #[arg(long, value_parser = parse_rect)]
    pub prior_roi: Option<Rect>,
    #[arg(long)]
    pub canny_low: Option<f64>,
    #[arg(long)]
    pub canny_high: Option<f64>,
    #[arg(long)]
    pub hough_votes: Option<u32>,
    #[arg(long)]
    pub roi_w: Option<u32>,
    #[arg(long)]
    pub roi_h: Option<u32>,
}

#[derive(Debug, Args)]
pub struct VegetationArgs {
    /// Vegetation config (JSON); defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config's severity level.
    #[arg(long, value_enum)]
    pub level: Option<Level>,
    /// Track geometry JSON, as written by `detect`.
    #[arg(long)]
    pub geometry: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Write the rendered blob specs as JSON.
    #[arg(long)]
    pub out_spec: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KinkArgs {
    #[arg(long, value_enum)]
    pub variant: Variant,
    /// Rail style and random ranges (JSON); defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub geometry: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub out_spec: Option<PathBuf>,
    /// Rail to alter; drawn from the seed when omitted.
    #[arg(long, value_enum)]
    pub rail: Option<Side>,
    /// Kink start along the rail, 0 at the bottom edge and 1 at the vanishing point.
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub t1: Option<f64>,
    /// Kink displacement in pixels.
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long, value_enum)]
    pub direction: Option<Side>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Build config (JSON). Relative paths in it resolve against its directory.
    #[arg(long)]
    pub config: PathBuf,
    /// Emit region-of-interest crops instead of full frames.
    #[arg(long)]
    pub emit_roi_crops: bool,
    /// Worker threads.
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: Option<u16>,
    /// Overrides the config's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Variant {
    Kink,
    Missing,
    Broken,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn rail(self) -> RailSide {
        match self {
            Side::Left => RailSide::LeftRail,
            Side::Right => RailSide::RightRail,
        }
    }

    pub fn direction(self) -> KinkDirection {
        match self {
            Side::Left => KinkDirection::Left,
            Side::Right => KinkDirection::Right,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Level {
    Sparse,
    Medium,
    High,
}

impl From<Level> for VegetationLevel {
    fn from(l: Level) -> Self {
        match l {
            Level::Sparse => VegetationLevel::Sparse,
            Level::Medium => VegetationLevel::Medium,
            Level::High => VegetationLevel::High,
        }
    }
}

fn parse_rect(s: &str) -> Result<Rect, String> {
    let parts: Vec<u32> = s
        .split(',')
        .map(|p| p.trim().parse::<u32>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [x, y, w, h] if w > 0 && h > 0 => Ok(Rect::new(x, y, w, h)),
        [_, _, _, _] => Err("width and height must be positive".into()),
        _ => Err(format!("expected x,y,w,h, got {s:?}")),
    }
}
