//! Thick-curve rasterization by dense sampling and disc stamping.

use super::spline::SplineCurve;
use crate::imagecore::RgbImage;
use crate::trackdetect::{LineSegment, Point};

/// Largest allowed chord between consecutive samples, in pixels.
const MAX_STEP: f64 = 0.5;

/// Samples the curve over its knot domain so that consecutive samples are at
/// most half a pixel apart.
pub fn sample_curve(curve: &SplineCurve<f64>) -> Vec<Point> {
    let (t0, t1) = curve.domain();
    let eval = |i: usize, n: usize| {
        let t = t0 + (t1 - t0) * i as f64 / n as f64;
        let (x, y) = curve.eval(t);
        Point::new(x, y)
    };
    let mut n = 64usize;
    loop {
        let pts: Vec<Point> = (0..=n).map(|i| eval(i, n)).collect();
        let max_chord = pts.windows(2).map(|w| w[0].dist(w[1])).fold(0.0, f64::max);
        if max_chord <= MAX_STEP || n >= 1 << 24 {
            return pts;
        }
        let grow = (max_chord / MAX_STEP * 1.25).ceil() as usize;
        n = n.saturating_mul(grow.max(2));
    }
}

/// Pixels covered by a disc of diameter `thickness` centered at `p`, plus the
/// pixel nearest to `p` so that thin strokes never leave gaps.
fn disc_pixels(p: Point, thickness: u32, mut f: impl FnMut(i64, i64)) {
    let r = thickness as f64 / 2.0;
    let (x0, x1) = ((p.x - r).floor() as i64, (p.x + r).ceil() as i64);
    let (y0, y1) = ((p.y - r).floor() as i64, (p.y + r).ceil() as i64);
    let (rx, ry) = (p.x.round() as i64, p.y.round() as i64);
    for y in y0..=y1 {
        for x in x0..=x1 {
            let d2 = (x as f64 - p.x).powi(2) + (y as f64 - p.y).powi(2);
            if d2 <= r * r || (x == rx && y == ry) {
                f(x, y);
            }
        }
    }
}

/// Strokes `curve` with the given color and thickness; parts outside the
/// image are clipped.
pub fn draw_curve(img: &RgbImage, curve: &SplineCurve<f64>, color: [u8; 3], thickness: u32) -> RgbImage {
    let mut out = img.clone();
    stroke(&mut out, curve, color, thickness);
    out
}

pub(crate) fn stroke(img: &mut RgbImage, curve: &SplineCurve<f64>, color: [u8; 3], thickness: u32) {
    let thickness = thickness.max(1);
    let (w, h) = (img.width() as f64, img.height() as f64);
    let margin = thickness as f64;
    for p in sample_curve(curve) {
        if p.x < -margin || p.y < -margin || p.x > w + margin || p.y > h + margin || !p.x.is_finite() {
            continue;
        }
        disc_pixels(p, thickness, |x, y| img.put_clipped(x, y, color));
    }
}

/// Straight two-knot curve from `p0` (t = 0) to `p1` (t = 1).
pub fn segment_curve(seg: &LineSegment) -> SplineCurve<f64> {
    SplineCurve::fit(&[(0.0, seg.p0.x, seg.p0.y), (1.0, seg.p1.x, seg.p1.y)])
        .expect("two knots with increasing parameter")
}

pub fn draw_segment(img: &RgbImage, seg: &LineSegment, color: [u8; 3], thickness: u32) -> RgbImage {
    draw_curve(img, &segment_curve(seg), color, thickness)
}
