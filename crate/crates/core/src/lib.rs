//! Railway track detection and procedural track-anomaly injection.
//!
//! The pipeline finds the two converging rails in a forward-facing frame
//! (Canny edges, Hough voting, slope-sign grouping), derives a fixed-size
//! region of interest, and injects vegetation overgrowth, sun kinks,
//! missing rails or broken rails into it. [`dataset`] drives the whole
//! thing to produce balanced, labeled, reproducible image sets.
//!
//! Filtering, edge detection and spline fitting are generic over the
//! scalar type; the aliases below pick the usual concrete instantiations.

// Range checks are written as `!(x > 0.0)` on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod imagecore;
pub mod kinksim;
pub mod scalar;
pub mod synth;
pub mod trackdetect;
pub mod vegsim;

pub use dataset::{build_dataset, BuildConfig, Manifest};
pub use imagecore::{ImageError, Rect, RgbImage};
pub use kinksim::{BreakSpec, KinkSpec, KinkStyle, NaturalCubicSpline, SplineCurve};
pub use scalar::{Field, Real};
pub use trackdetect::{detect_track, DetectConfig, DetectError, TrackGeometry};
pub use vegsim::{BlobSpec, VegetationConfig};

/// Grayscale raster with `f64` intensities.
pub type GrayImage = imagecore::GrayImage<f64>;
/// Grayscale raster with `f32` intensities.
pub type GrayImageF32 = imagecore::GrayImage<f32>;

/// Natural cubic spline over `f64`.
pub type CubicSpline = NaturalCubicSpline<f64>;
/// Natural cubic spline over `f32`.
pub type CubicSplineF32 = NaturalCubicSpline<f32>;
/// Natural cubic spline over exact rationals.
pub type ExactCubicSpline = NaturalCubicSpline<num_rational::Ratio<i64>>;
/// Planar rail curve over `f64`.
pub type RailCurve = SplineCurve<f64>;
