//! Vegetation overgrowth: clusters of Gaussian-scattered greenish pixels
//! dropped inside the region of interest. The number of clusters sets the
//! severity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imagecore::{Rect, RgbImage};
use crate::trackdetect::{Point, TrackGeometry};

#[derive(Debug, Error)]
pub enum VegetationError {
    #[error("invalid vegetation config: {0}")]
    InvalidConfig(String),
    #[error("blob center ({x:.2}, {y:.2}) outside roi {roi:?}")]
    CenterOutsideRoi { x: f64, y: f64, roi: Rect },
    #[error("roi {roi:?} outside {width}x{height} image")]
    RoiOutsideImage { roi: Rect, width: u32, height: u32 },
    #[error("invalid blob: {0}")]
    InvalidBlob(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VegetationLevel {
    Sparse,
    Medium,
    High,
}

/// Shape of the per-blob pixel scatter. Only the bivariate normal exists so far.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlobDistribution {
    #[default]
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelRanges {
    pub sparse: (u32, u32),
    pub medium: (u32, u32),
    pub high: (u32, u32),
}

impl LevelRanges {
    pub fn get(&self, level: VegetationLevel) -> (u32, u32) {
        match level {
            VegetationLevel::Sparse => self.sparse,
            VegetationLevel::Medium => self.medium,
            VegetationLevel::High => self.high,
        }
    }
}

/// Inclusive per-channel color bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenRanges {
    pub r: (u8, u8),
    pub g: (u8, u8),
    pub b: (u8, u8),
}

impl GreenRanges {
    fn sample(&self, rng: &mut impl Rng) -> [u8; 3] {
        [
            rng.random_range(self.r.0..=self.r.1),
            rng.random_range(self.g.0..=self.g.1),
            rng.random_range(self.b.0..=self.b.1),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VegetationConfig {
    pub level: VegetationLevel,
    pub blob_count_range: LevelRanges,
    pub sigma_range: (f64, f64),
    pub pixels_per_blob_range: (u32, u32),
    pub green_ranges: GreenRanges,
    pub distribution: BlobDistribution,
}

impl Default for VegetationConfig {
    fn default() -> Self {
        VegetationConfig {
            level: VegetationLevel::Medium,
            blob_count_range: LevelRanges {
                sparse: (2, 6),
                medium: (7, 15),
                high: (16, 30),
            },
            sigma_range: (2.0, 12.0),
            pixels_per_blob_range: (100, 1500),
            green_ranges: GreenRanges {
                r: (10, 80),
                g: (90, 200),
                b: (10, 80),
            },
            distribution: BlobDistribution::Normal,
        }
    }
}

impl VegetationConfig {
    pub fn validate(&self) -> Result<(), VegetationError> {
        let bad = |m: &str| Err(VegetationError::InvalidConfig(m.to_string()));
        let LevelRanges { sparse, medium, high } = self.blob_count_range;
        for (name, (lo, hi)) in [("sparse", sparse), ("medium", medium), ("high", high)] {
            if lo > hi {
                return bad(&format!("{name} blob_count_range is empty"));
            }
        }
        if !(sparse.1 < medium.0 && medium.1 < high.0) {
            return bad("blob count ranges must be ordered and disjoint: sparse < medium < high");
        }
        let (s0, s1) = self.sigma_range;
        if !(s0 > 0.0 && s0 <= s1 && s1.is_finite()) {
            return bad("sigma_range must satisfy 0 < min <= max");
        }
        if self.pixels_per_blob_range.0 > self.pixels_per_blob_range.1 {
            return bad("pixels_per_blob_range is empty");
        }
        let GreenRanges { r, g, b } = self.green_ranges;
        if r.0 > r.1 || g.0 > g.1 || b.0 > b.1 {
            return bad("green_ranges must be non-empty");
        }
        if !(g.0 > r.1 && g.0 > b.1) {
            return bad("green minimum must exceed red and blue maxima");
        }
        Ok(())
    }
}

/// One grass blob.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlobSpec {
    pub center: Point,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub n_pixels: u32,
    /// Seeds the per-pixel color stream.
    pub hue_seed: u64,
}

impl BlobSpec {
    /// Upper bound on `n_pixels` for the given spreads: ten samples per unit
    /// of Gaussian footprint `2π·σx·σy`.
    pub fn density_cap(sigma_x: f64, sigma_y: f64) -> u32 {
        (10.0 * 2.0 * std::f64::consts::PI * sigma_x * sigma_y)
            .floor()
            .min(u32::MAX as f64) as u32
    }
}

/// Scatters `blob.n_pixels` normal samples around the blob center and paints
/// each one that lands inside `roi` with an independently drawn green.
pub fn render_blob(
    img: &RgbImage,
    blob: &BlobSpec,
    roi: Rect,
    greens: &GreenRanges,
    rng: &mut impl Rng,
) -> Result<RgbImage, VegetationError> {
    let mut out = img.clone();
    paint_blob(&mut out, blob, roi, greens, rng)?;
    Ok(out)
}

fn paint_blob(
    img: &mut RgbImage,
    blob: &BlobSpec,
    roi: Rect,
    greens: &GreenRanges,
    rng: &mut impl Rng,
) -> Result<(), VegetationError> {
    if !roi.contains_point(blob.center.x, blob.center.y) {
        return Err(VegetationError::CenterOutsideRoi {
            x: blob.center.x,
            y: blob.center.y,
            roi,
        });
    }
    let nx = Normal::new(blob.center.x, blob.sigma_x).map_err(|e| VegetationError::InvalidBlob(e.to_string()))?;
    let ny = Normal::new(blob.center.y, blob.sigma_y).map_err(|e| VegetationError::InvalidBlob(e.to_string()))?;
    let mut colors = ChaCha8Rng::seed_from_u64(blob.hue_seed);
    for _ in 0..blob.n_pixels {
        let x = nx.sample(rng).round() as i64;
        let y = ny.sample(rng).round() as i64;
        let color = greens.sample(&mut colors);
        if roi.contains(x, y) {
            img.put_clipped(x, y, color);
        }
    }
    Ok(())
}

/// Draws a blob count for the configured level and scatters that many blobs
/// uniformly over the region of interest, rails included. Returns the frame
/// and the specs in rendering order.
pub fn simulate_vegetation(
    img: &RgbImage,
    geometry: &TrackGeometry,
    cfg: &VegetationConfig,
    seed: u64,
) -> Result<(RgbImage, Vec<BlobSpec>), VegetationError> {
    cfg.validate()?;
    let roi = geometry.roi;
    if !roi.fits_within(img.width(), img.height()) {
        return Err(VegetationError::RoiOutsideImage {
            roi,
            width: img.width(),
            height: img.height(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = cfg.blob_count_range.get(cfg.level);
    let count = rng.random_range(lo..=hi);
    let mut out = img.clone();
    let mut specs = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let center = Point::new(
            rng.random_range(roi.x as f64..roi.right() as f64),
            rng.random_range(roi.y as f64..roi.bottom() as f64),
        );
        let sigma_x = rng.random_range(cfg.sigma_range.0..=cfg.sigma_range.1);
        let sigma_y = rng.random_range(cfg.sigma_range.0..=cfg.sigma_range.1);
        let n_pixels = rng
            .random_range(cfg.pixels_per_blob_range.0..=cfg.pixels_per_blob_range.1)
            .min(BlobSpec::density_cap(sigma_x, sigma_y));
        let blob = BlobSpec {
            center,
            sigma_x,
            sigma_y,
            n_pixels,
            hue_seed: rng.random(),
        };
        paint_blob(&mut out, &blob, roi, &cfg.green_ranges, &mut rng)?;
        specs.push(blob);
    }
    Ok((out, specs))
}
