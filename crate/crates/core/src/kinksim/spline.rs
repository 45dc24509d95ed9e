//! Natural cubic splines, generic over any scalar with exact field arithmetic.

use thiserror::Error;

use crate::scalar::Field;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SplineError {
    #[error("a spline needs at least 2 knots, got {0}")]
    TooFewKnots(usize),
    #[error("knot parameters must be strictly increasing (violated at index {0})")]
    NotIncreasing(usize),
}

/// Piecewise cubic through `(t_i, v_i)` with zero second derivative at both
/// ends. On interval `i`, with `s = t - t_i`, the value is
/// `a + b·s + c·s² + d·s³`.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalCubicSpline<T> {
    knots: Vec<T>,
    coeffs: Vec<[T; 4]>,
    // value at the last knot, kept exact rather than re-evaluated
    last_value: T,
}

impl<T: Field> NaturalCubicSpline<T> {
    /// Fits through `(t, v)` pairs by solving the tridiagonal system for the
    /// knot second derivatives (Thomas algorithm).
    pub fn fit(points: &[(T, T)]) -> Result<Self, SplineError> {
        let n = points.len();
        if n < 2 {
            return Err(SplineError::TooFewKnots(n));
        }
        for i in 1..n {
            if !(points[i].0 > points[i - 1].0) {
                return Err(SplineError::NotIncreasing(i));
            }
        }
        let t: Vec<T> = points.iter().map(|p| p.0).collect();
        let v: Vec<T> = points.iter().map(|p| p.1).collect();
        let h: Vec<T> = t.windows(2).map(|w| w[1] - w[0]).collect();
        let six = T::two() * (T::two() + T::one());

        // second derivatives; m[0] = m[n-1] = 0
        let mut m = vec![T::zero(); n];
        if n > 2 {
            let interior = n - 2;
            let mut diag = Vec::with_capacity(interior);
            let mut upper = Vec::with_capacity(interior);
            let mut rhs = Vec::with_capacity(interior);
            for i in 1..n - 1 {
                diag.push(T::two() * (h[i - 1] + h[i]));
                upper.push(h[i]);
                rhs.push(six * ((v[i + 1] - v[i]) / h[i] - (v[i] - v[i - 1]) / h[i - 1]));
            }
            // forward sweep; sub-diagonal entry of row r is h[r]
            for r in 1..interior {
                let w = h[r] / diag[r - 1];
                diag[r] = diag[r] - w * upper[r - 1];
                rhs[r] = rhs[r] - w * rhs[r - 1];
            }
            let mut sol = vec![T::zero(); interior];
            sol[interior - 1] = rhs[interior - 1] / diag[interior - 1];
            for r in (0..interior - 1).rev() {
                sol[r] = (rhs[r] - upper[r] * sol[r + 1]) / diag[r];
            }
            m[1..n - 1].copy_from_slice(&sol);
        }

        let coeffs = (0..n - 1)
            .map(|i| {
                let a = v[i];
                let b = (v[i + 1] - v[i]) / h[i] - h[i] * (T::two() * m[i] + m[i + 1]) / six;
                let c = m[i] / T::two();
                let d = (m[i + 1] - m[i]) / (six * h[i]);
                [a, b, c, d]
            })
            .collect();
        Ok(NaturalCubicSpline {
            knots: t,
            coeffs,
            last_value: v[n - 1],
        })
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    /// Per-interval `[a, b, c, d]`.
    pub fn coefficients(&self) -> &[[T; 4]] {
        &self.coeffs
    }

    fn interval(&self, t: T) -> usize {
        let idx = self.knots.partition_point(|&k| k <= t);
        idx.saturating_sub(1).min(self.coeffs.len() - 1)
    }

    fn first(&self) -> T {
        self.knots[0]
    }

    fn last(&self) -> T {
        self.knots[self.knots.len() - 1]
    }

    fn end_slope(&self) -> T {
        let i = self.coeffs.len() - 1;
        let s = self.knots[i + 1] - self.knots[i];
        let [_, b, c, d] = self.coeffs[i];
        b + T::two() * c * s + (T::two() + T::one()) * d * s * s
    }

    /// Value at `t`; outside the knot range the curve continues along its end tangent.
    pub fn eval(&self, t: T) -> T {
        if t < self.first() {
            return self.coeffs[0][0] + self.coeffs[0][1] * (t - self.first());
        }
        if t >= self.last() {
            return self.last_value + self.end_slope() * (t - self.last());
        }
        let i = self.interval(t);
        let s = t - self.knots[i];
        let [a, b, c, d] = self.coeffs[i];
        a + s * (b + s * (c + s * d))
    }

    pub fn derivative(&self, t: T) -> T {
        if t < self.first() {
            return self.coeffs[0][1];
        }
        if t > self.last() {
            return self.end_slope();
        }
        let i = self.interval(t);
        let s = t - self.knots[i];
        let [_, b, c, d] = self.coeffs[i];
        b + s * (T::two() * c + (T::two() + T::one()) * d * s)
    }

    pub fn second_derivative(&self, t: T) -> T {
        if t < self.first() || t > self.last() {
            return T::zero();
        }
        let i = self.interval(t);
        let s = t - self.knots[i];
        let [_, _, c, d] = self.coeffs[i];
        T::two() * c + T::two() * (T::two() + T::one()) * d * s
    }

    /// One-sided limits `(value, first, second derivative)` at the end of
    /// interval `i`, i.e. approaching knot `i + 1` from the left.
    pub fn left_limits(&self, i: usize) -> (T, T, T) {
        let s = self.knots[i + 1] - self.knots[i];
        let [a, b, c, d] = self.coeffs[i];
        let three = T::two() + T::one();
        (
            a + s * (b + s * (c + s * d)),
            b + s * (T::two() * c + three * d * s),
            T::two() * c + T::two() * three * d * s,
        )
    }
}

/// A planar curve `(x(t), y(t))` made of two natural splines sharing knot parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineCurve<T> {
    pub x: NaturalCubicSpline<T>,
    pub y: NaturalCubicSpline<T>,
}

impl<T: Field> SplineCurve<T> {
    /// Fits through `(t, x, y)` triples.
    pub fn fit(points: &[(T, T, T)]) -> Result<Self, SplineError> {
        let xs: Vec<(T, T)> = points.iter().map(|p| (p.0, p.1)).collect();
        let ys: Vec<(T, T)> = points.iter().map(|p| (p.0, p.2)).collect();
        Ok(SplineCurve {
            x: NaturalCubicSpline::fit(&xs)?,
            y: NaturalCubicSpline::fit(&ys)?,
        })
    }

    pub fn eval(&self, t: T) -> (T, T) {
        (self.x.eval(t), self.y.eval(t))
    }

    /// Parameter range covered by the knots.
    pub fn domain(&self) -> (T, T) {
        (self.x.first(), self.x.last())
    }
}
