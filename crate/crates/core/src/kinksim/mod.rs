//! Sun-kink, missing-rail and broken-rail injection.
//!
//! A rail is erased by copying a sideways-shifted strip of the frame over
//! it, which keeps the ties continuous, and is then optionally redrawn as a
//! spline bent away from its original line.

mod raster;
mod spline;

pub use raster::{draw_curve, draw_segment, sample_curve, segment_curve};
pub use spline::{NaturalCubicSpline, SplineCurve, SplineError};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imagecore::RgbImage;
use crate::trackdetect::{LineSegment, Point, TrackGeometry};

#[derive(Debug, Error)]
pub enum KinkError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("invalid style: {0}")]
    InvalidStyle(String),
    #[error("shift {shift} must exceed band half-width {band_halfwidth}")]
    ShiftTooSmall { shift: i32, band_halfwidth: f64 },
    #[error("shifted source column {column} lies outside the {width}-pixel-wide image")]
    ShiftOutOfBounds { column: i64, width: u32 },
    #[error(transparent)]
    Spline(#[from] SplineError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RailSide {
    LeftRail,
    RightRail,
}

impl RailSide {
    pub fn select(self, geometry: &TrackGeometry) -> LineSegment {
        match self {
            RailSide::LeftRail => geometry.left_rail,
            RailSide::RightRail => geometry.right_rail,
        }
    }

    /// Fair coin drawn from `seed`.
    pub fn from_seed(seed: u64) -> RailSide {
        if ChaCha8Rng::seed_from_u64(seed).random_bool(0.5) {
            RailSide::LeftRail
        } else {
            RailSide::RightRail
        }
    }

    /// Sign of the horizontal shift that sources replacement pixels from
    /// outside the track.
    fn outward(self) -> i32 {
        match self {
            RailSide::LeftRail => -1,
            RailSide::RightRail => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KinkDirection {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinkSpec {
    pub t0: f64,
    pub t1: f64,
    pub amplitude: f64,
    pub direction: KinkDirection,
    pub rail: RailSide,
}

impl KinkSpec {
    pub const MIN_EXTENT: f64 = 0.05;

    pub fn validate(&self, max_amplitude: f64) -> Result<(), KinkError> {
        let bad = |m: String| Err(KinkError::InvalidSpec(m));
        if !(0.0..=1.0).contains(&self.t0) || !(0.0..=1.0).contains(&self.t1) || !(self.t0 < self.t1) {
            return bad(format!("need 0 <= t0 < t1 <= 1, got t0={} t1={}", self.t0, self.t1));
        }
        if self.t1 - self.t0 < Self::MIN_EXTENT {
            return bad(format!("kink extent {} below {}", self.t1 - self.t0, Self::MIN_EXTENT));
        }
        if !(self.amplitude >= 0.0 && self.amplitude <= max_amplitude) {
            return bad(format!("amplitude {} outside [0, {max_amplitude}]", self.amplitude));
        }
        Ok(())
    }
}

/// Kink parameters with any subset pinned; unset fields are drawn from the seed.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct KinkRequest {
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub amplitude: Option<f64>,
    pub direction: Option<KinkDirection>,
    pub rail: Option<RailSide>,
}

impl From<KinkSpec> for KinkRequest {
    fn from(s: KinkSpec) -> Self {
        KinkRequest {
            t0: Some(s.t0),
            t1: Some(s.t1),
            amplitude: Some(s.amplitude),
            direction: Some(s.direction),
            rail: Some(s.rail),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakSpec {
    pub t0: f64,
    pub t1: f64,
    pub rail: RailSide,
    pub dark_color: [u8; 3],
}

impl BreakSpec {
    pub const MAX_DARK: u8 = 60;

    pub fn validate(&self) -> Result<(), KinkError> {
        if !(0.0..=1.0).contains(&self.t0) || !(0.0..=1.0).contains(&self.t1) || !(self.t0 < self.t1) {
            return Err(KinkError::InvalidSpec(format!(
                "need 0 <= t0 < t1 <= 1, got t0={} t1={}",
                self.t0, self.t1
            )));
        }
        if self.dark_color.iter().any(|&c| c > Self::MAX_DARK) {
            return Err(KinkError::InvalidSpec(format!(
                "dark_color {:?} has a channel above {}",
                self.dark_color,
                Self::MAX_DARK
            )));
        }
        Ok(())
    }

    /// Random break on `rail` (or a seed-chosen rail) within the style's ranges.
    pub fn random(style: &KinkStyle, rail: Option<RailSide>, seed: u64) -> BreakSpec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let extent = uniform(&mut rng, style.break_extent_range);
        let t0 = rng.random_range(0.0..=(1.0 - extent).max(0.0));
        let drawn_rail = if rng.random_bool(0.5) {
            RailSide::LeftRail
        } else {
            RailSide::RightRail
        };
        let shade = rng.random_range(0..=Self::MAX_DARK);
        BreakSpec {
            t0,
            t1: (t0 + extent).min(1.0),
            rail: rail.unwrap_or(drawn_rail),
            dark_color: [shade, shade, shade.saturating_sub(5)],
        }
    }
}

/// Rendering parameters and random ranges shared by the rail simulators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KinkStyle {
    /// Color of the redrawn rail; estimated from the original rail when unset.
    pub rail_color: Option<[u8; 3]>,
    pub thickness: u32,
    pub band_halfwidth: f64,
    /// Magnitude of the sideways copy; always applied away from the track center.
    pub shift: i32,
    pub max_amplitude: f64,
    pub amplitude_range: (f64, f64),
    pub extent_range: (f64, f64),
    pub break_extent_range: (f64, f64),
}

impl Default for KinkStyle {
    fn default() -> Self {
        KinkStyle {
            rail_color: None,
            thickness: 5,
            band_halfwidth: 6.0,
            shift: 15,
            max_amplitude: 40.0,
            amplitude_range: (10.0, 40.0),
            extent_range: (0.1, 0.4),
            break_extent_range: (0.05, 0.3),
        }
    }
}

impl KinkStyle {
    pub fn validate(&self) -> Result<(), KinkError> {
        let bad = |m: &str| Err(KinkError::InvalidStyle(m.to_string()));
        if self.thickness == 0 {
            return bad("thickness must be >= 1");
        }
        if !(self.band_halfwidth >= 0.0) {
            return bad("band_halfwidth must be >= 0");
        }
        if self.shift != 0 && (self.shift.abs() as f64) <= self.band_halfwidth {
            return bad("shift must exceed band_halfwidth");
        }
        let (a0, a1) = self.amplitude_range;
        if !(0.0 <= a0 && a0 <= a1 && a1 <= self.max_amplitude) {
            return bad("amplitude_range must satisfy 0 <= min <= max <= max_amplitude");
        }
        let (e0, e1) = self.extent_range;
        if !(KinkSpec::MIN_EXTENT <= e0 && e0 <= e1 && e1 <= 1.0) {
            return bad("extent_range must lie in [0.05, 1] with min <= max");
        }
        let (b0, b1) = self.break_extent_range;
        if !(0.0 < b0 && b0 <= b1 && b1 <= 1.0) {
            return bad("break_extent_range must lie in (0, 1] with min <= max");
        }
        Ok(())
    }

    /// Fills the unset fields of `request` from `seed`. Every random field is
    /// drawn regardless, so pinning one field never shifts the others.
    pub fn resolve(&self, request: &KinkRequest, seed: u64) -> Result<KinkSpec, KinkError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let extent = uniform(&mut rng, self.extent_range);
        let start = rng.random_range(0.0..=(1.0 - extent).max(0.0));
        let amplitude = uniform(&mut rng, self.amplitude_range);
        let direction = if rng.random_bool(0.5) {
            KinkDirection::Left
        } else {
            KinkDirection::Right
        };
        let rail = if rng.random_bool(0.5) {
            RailSide::LeftRail
        } else {
            RailSide::RightRail
        };
        let t0 = request.t0.unwrap_or(start);
        let spec = KinkSpec {
            t0,
            t1: request.t1.unwrap_or_else(|| (t0 + extent).min(1.0)),
            amplitude: request.amplitude.unwrap_or(amplitude),
            direction: request.direction.unwrap_or(direction),
            rail: request.rail.unwrap_or(rail),
        };
        spec.validate(self.max_amplitude)?;
        Ok(spec)
    }
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Pixels whose centers lie within `band_halfwidth` of the segment, clipped to
/// a `width × height` raster, in row-major order.
pub fn band_pixels(rail: &LineSegment, band_halfwidth: f64, width: u32, height: u32) -> Vec<(u32, u32)> {
    let x0 = (rail.p0.x.min(rail.p1.x) - band_halfwidth).floor().max(0.0);
    let x1 = (rail.p0.x.max(rail.p1.x) + band_halfwidth)
        .ceil()
        .min(width as f64 - 1.0);
    let y0 = (rail.p0.y.min(rail.p1.y) - band_halfwidth).floor().max(0.0);
    let y1 = (rail.p0.y.max(rail.p1.y) + band_halfwidth)
        .ceil()
        .min(height as f64 - 1.0);
    let mut out = Vec::new();
    if !(x0 <= x1 && y0 <= y1) {
        return out;
    }
    for y in y0 as u32..=y1 as u32 {
        for x in x0 as u32..=x1 as u32 {
            if rail.segment_distance(Point::new(x as f64, y as f64)) <= band_halfwidth {
                out.push((x, y));
            }
        }
    }
    out
}

/// Overwrites every pixel within `band_halfwidth` of the rail with the pixel
/// `shift` columns away in the input.
pub fn remove_rail(img: &RgbImage, rail: &LineSegment, band_halfwidth: f64, shift: i32) -> Result<RgbImage, KinkError> {
    if shift == 0 {
        return Ok(img.clone());
    }
    if (shift.abs() as f64) <= band_halfwidth {
        return Err(KinkError::ShiftTooSmall { shift, band_halfwidth });
    }
    let band = band_pixels(rail, band_halfwidth, img.width(), img.height());
    for &(x, _) in &band {
        let column = x as i64 + shift as i64;
        if column < 0 || column >= img.width() as i64 {
            return Err(KinkError::ShiftOutOfBounds {
                column,
                width: img.width(),
            });
        }
    }
    let mut out = img.clone();
    for (x, y) in band {
        out.put(x, y, img.get((x as i64 + shift as i64) as u32, y));
    }
    Ok(out)
}

/// Median (by luma) of the brightest quarter of the band around the rail.
pub fn estimate_rail_color(img: &RgbImage, rail: &LineSegment, band_halfwidth: f64) -> Option<[u8; 3]> {
    let mut px: Vec<[u8; 3]> = band_pixels(rail, band_halfwidth, img.width(), img.height())
        .into_iter()
        .map(|(x, y)| img.get(x, y))
        .collect();
    if px.is_empty() {
        return None;
    }
    let luma = |c: &[u8; 3]| 299 * c[0] as u32 + 587 * c[1] as u32 + 114 * c[2] as u32;
    px.sort_by_key(|c| (luma(c), *c));
    let quarter = px.len().div_ceil(4);
    let top = &px[px.len() - quarter..];
    Some(top[top.len() / 2])
}

/// Spline through the rail at `{0, t0, mid, t1, 1}`, with the middle knot
/// pushed `amplitude` pixels perpendicular to the rail.
pub fn build_kink_curve(rail: &LineSegment, spec: &KinkSpec) -> Result<SplineCurve<f64>, KinkError> {
    if !(spec.t0 < spec.t1) {
        return Err(KinkError::InvalidSpec(format!(
            "t0 {} must be < t1 {}",
            spec.t0, spec.t1
        )));
    }
    let (mut nx, mut ny) = rail.unit_normal();
    // orient the normal toward screen-left, falling back to screen-up for horizontal rails
    if nx > 1e-12 || (nx.abs() <= 1e-12 && ny > 0.0) {
        nx = -nx;
        ny = -ny;
    }
    if spec.direction == KinkDirection::Right {
        nx = -nx;
        ny = -ny;
    }
    let mid = 0.5 * (spec.t0 + spec.t1);
    let mut knots: Vec<(f64, f64, f64)> = Vec::with_capacity(5);
    for t in [0.0, spec.t0, mid, spec.t1, 1.0] {
        if knots.last().is_some_and(|k| k.0 >= t) {
            continue;
        }
        let p = rail.at(t);
        if t == mid {
            knots.push((t, p.x + spec.amplitude * nx, p.y + spec.amplitude * ny));
        } else {
            knots.push((t, p.x, p.y));
        }
    }
    Ok(SplineCurve::fit(&knots)?)
}

fn outward_shift(style: &KinkStyle, rail: RailSide) -> i32 {
    style.shift.abs() * rail.outward()
}

/// Erases the chosen rail and redraws it with a kink. Returns the rendered
/// frame and the fully resolved spec.
pub fn simulate_sun_kink(
    img: &RgbImage,
    geometry: &TrackGeometry,
    request: &KinkRequest,
    style: &KinkStyle,
    seed: u64,
) -> Result<(RgbImage, KinkSpec), KinkError> {
    style.validate()?;
    let spec = style.resolve(request, seed)?;
    let rail = spec.rail.select(geometry);
    let color = style
        .rail_color
        .or_else(|| estimate_rail_color(img, &rail, style.band_halfwidth))
        .unwrap_or([200, 200, 200]);
    let mut out = remove_rail(img, &rail, style.band_halfwidth, outward_shift(style, spec.rail))?;
    let curve = build_kink_curve(&rail, &spec)?;
    raster::stroke(&mut out, &curve, color, style.thickness);
    Ok((out, spec))
}

pub fn simulate_missing_rail(
    img: &RgbImage,
    geometry: &TrackGeometry,
    rail: RailSide,
    style: &KinkStyle,
) -> Result<RgbImage, KinkError> {
    style.validate()?;
    remove_rail(
        img,
        &rail.select(geometry),
        style.band_halfwidth,
        outward_shift(style, rail),
    )
}

/// Connects two points of the rail with a dark stroke.
pub fn simulate_broken_rail(
    img: &RgbImage,
    geometry: &TrackGeometry,
    spec: &BreakSpec,
    style: &KinkStyle,
) -> Result<RgbImage, KinkError> {
    spec.validate()?;
    style.validate()?;
    let rail = spec.rail.select(geometry);
    let gap = LineSegment::new(rail.at(spec.t0), rail.at(spec.t1));
    Ok(draw_segment(img, &gap, spec.dark_color, style.thickness))
}
