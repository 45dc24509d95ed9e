//! Numeric traits the generic parts of the crate are written against.
//!
//! [`Field`] only asks for exact field arithmetic, so it admits rationals
//! (`Ratio<i64>`) as well as floats. [`Real`] adds the transcendental
//! functions needed by filtering and edge detection.

use std::fmt::Debug;
use std::ops::Neg;

use num_traits::{Float, FromPrimitive, Num, NumCast};

/// Scalar with exact field operations: spline fitting and evaluation only need this.
pub trait Field: Num + Copy + PartialOrd + Neg<Output = Self> + Debug {
    fn two() -> Self {
        Self::one() + Self::one()
    }
}

impl<T: Num + Copy + PartialOrd + Neg<Output = T> + Debug> Field for T {}

/// floating point: f32 or f64
pub trait Real: Field + Float + FromPrimitive + NumCast + Default + Send + Sync + 'static {
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable")
    }

    fn to_f64_lossy(self) -> f64 {
        NumCast::from(self).unwrap_or(f64::NAN)
    }
}

impl<T: Field + Float + FromPrimitive + NumCast + Default + Send + Sync + 'static> Real for T {}
