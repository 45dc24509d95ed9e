use std::cmp::Ordering;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::canny::EdgeMap;
use super::hough::HoughLine;
use super::DetectError;
use crate::imagecore::Rect;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(&self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSegment {
    pub p0: Point,
    pub p1: Point,
}

impl LineSegment {
    pub fn new(p0: Point, p1: Point) -> Self {
        LineSegment { p0, p1 }
    }

    pub fn length(&self) -> f64 {
        self.p0.dist(self.p1)
    }

    /// Point at parameter `t` (0 = `p0`, 1 = `p1`).
    pub fn at(&self, t: f64) -> Point {
        Point::new(
            self.p0.x + t * (self.p1.x - self.p0.x),
            self.p0.y + t * (self.p1.y - self.p0.y),
        )
    }

    /// Unit normal, rotated +90° from the `p0 → p1` direction.
    pub fn unit_normal(&self) -> (f64, f64) {
        let (dx, dy) = (self.p1.x - self.p0.x, self.p1.y - self.p0.y);
        let len = dx.hypot(dy);
        (-dy / len, dx / len)
    }

    /// Distance from `p` to the infinite line through the segment.
    pub fn line_distance(&self, p: Point) -> f64 {
        let (nx, ny) = self.unit_normal();
        ((p.x - self.p0.x) * nx + (p.y - self.p0.y) * ny).abs()
    }

    /// Distance from `p` to the closed segment.
    pub fn segment_distance(&self, p: Point) -> f64 {
        let (dx, dy) = (self.p1.x - self.p0.x, self.p1.y - self.p0.y);
        let len_sq = dx * dx + dy * dy;
        let t = if len_sq == 0.0 {
            0.0
        } else {
            (((p.x - self.p0.x) * dx + (p.y - self.p0.y) * dy) / len_sq).clamp(0.0, 1.0)
        };
        p.dist(self.at(t))
    }

    /// x where the infinite line crosses the row `y`.
    pub fn x_at_y(&self, y: f64) -> f64 {
        let (dx, dy) = (self.p1.x - self.p0.x, self.p1.y - self.p0.y);
        self.p0.x + (y - self.p0.y) * dx / dy
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackGeometry {
    pub left_rail: LineSegment,
    pub right_rail: LineSegment,
    pub roi: Rect,
    pub vanishing_point: Point,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SlopeGroups {
    pub positive: Vec<HoughLine>,
    pub negative: Vec<HoughLine>,
    pub discarded: Vec<HoughLine>,
}

/// Partitions lines by the sign of their image slope, dropping those whose
/// direction is within `horizontal_tolerance` radians of horizontal.
///
/// A normal angle below π/2 gives a negative slope (the line rises to the
/// right on screen); above π/2 a positive one. Vertical lines (theta = 0)
/// take the negative side, the limit of the slope as theta → 0⁺.
pub fn group_by_slope(lines: &[HoughLine], horizontal_tolerance: f64) -> SlopeGroups {
    let mut groups = SlopeGroups::default();
    for &line in lines {
        if (line.theta - FRAC_PI_2).abs() <= horizontal_tolerance {
            groups.discarded.push(line);
        } else if line.theta < FRAC_PI_2 {
            groups.negative.push(line);
        } else {
            groups.positive.push(line);
        }
    }
    groups
}

fn representative_order(a: &HoughLine, b: &HoughLine) -> Ordering {
    b.votes
        .cmp(&a.votes)
        .then_with(|| b.slope().abs().total_cmp(&a.slope().abs()))
        .then_with(|| a.rho.total_cmp(&b.rho))
        .then_with(|| a.theta.total_cmp(&b.theta))
}

/// Highest-voted line of a group; ties go to the steeper line, then the smaller rho.
pub fn representative(group: &[HoughLine]) -> Option<HoughLine> {
    group.iter().copied().min_by(representative_order)
}

/// Picks one line per slope group and turns the pair into rail segments
/// running from the bottom row of the frame up to their intersection.
pub fn select_track_lines(
    positive: &[HoughLine],
    negative: &[HoughLine],
    frame_w: u32,
    frame_h: u32,
) -> Result<(LineSegment, LineSegment, Point), DetectError> {
    let right = representative(positive).ok_or(DetectError::RailNotFound("positive-slope"))?;
    let left = representative(negative).ok_or(DetectError::RailNotFound("negative-slope"))?;
    rails_from_lines(&left, &right, frame_w, frame_h)
}

pub(crate) fn rails_from_lines(
    left: &HoughLine,
    right: &HoughLine,
    frame_w: u32,
    frame_h: u32,
) -> Result<(LineSegment, LineSegment, Point), DetectError> {
    let vp = intersect(left, right).ok_or(DetectError::NoConvergence("rails are parallel".into()))?;
    let bottom = frame_h as f64 - 1.0;
    if !(vp.y >= 0.0 && vp.y < bottom) {
        return Err(DetectError::NoConvergence(format!(
            "rails meet at y = {:.1}, outside [0, {})",
            vp.y, frame_h
        )));
    }
    let left_seg = LineSegment::new(entry_point(left, frame_w, frame_h), vp);
    let right_seg = LineSegment::new(entry_point(right, frame_w, frame_h), vp);
    if left_seg.length() < 1e-9 || right_seg.length() < 1e-9 {
        return Err(DetectError::NoConvergence("degenerate rail segment".into()));
    }
    Ok((left_seg, right_seg, vp))
}

fn intersect(a: &HoughLine, b: &HoughLine) -> Option<Point> {
    let (c1, s1) = (a.theta.cos(), a.theta.sin());
    let (c2, s2) = (b.theta.cos(), b.theta.sin());
    let det = c1 * s2 - s1 * c2;
    if det.abs() < 1e-9 {
        return None;
    }
    Some(Point::new(
        (a.rho * s2 - b.rho * s1) / det,
        (c1 * b.rho - c2 * a.rho) / det,
    ))
}

/// Where the line enters the frame from below: its crossing of the bottom row,
/// or of a side column when it leaves through the side first.
fn entry_point(line: &HoughLine, frame_w: u32, frame_h: u32) -> Point {
    let (c, s) = (line.theta.cos(), line.theta.sin());
    let bottom = frame_h as f64 - 1.0;
    let right = frame_w as f64 - 1.0;
    let x = (line.rho - bottom * s) / c;
    if x < 0.0 && s.abs() > 1e-12 {
        Point::new(0.0, line.rho / s)
    } else if x > right && s.abs() > 1e-12 {
        Point::new(right, (line.rho - right * c) / s)
    } else {
        Point::new(x, bottom)
    }
}

/// Fixed-size rectangle centered between the rails where they reach the
/// bottom row, bottom-aligned, then clamped into the frame.
pub fn compute_roi(
    left_rail: &LineSegment,
    right_rail: &LineSegment,
    roi_w: u32,
    roi_h: u32,
    frame_w: u32,
    frame_h: u32,
) -> Result<Rect, DetectError> {
    if roi_w == 0 || roi_h == 0 || roi_w > frame_w || roi_h > frame_h {
        return Err(DetectError::RoiTooLarge {
            roi_w,
            roi_h,
            frame_w,
            frame_h,
        });
    }
    let bottom = frame_h as f64 - 1.0;
    let center = 0.5 * (left_rail.x_at_y(bottom) + right_rail.x_at_y(bottom));
    let max_x = (frame_w - roi_w) as f64;
    let x = if center.is_finite() {
        (center - roi_w as f64 / 2.0).round().clamp(0.0, max_x)
    } else {
        0.0
    };
    Ok(Rect::new(x as u32, frame_h - roi_h, roi_w, roi_h))
}

/// Total-least-squares refit of `line` to the edge pixels within `band` pixels
/// of it, repeated `iterations` times. Returns the input unchanged when fewer
/// than two pixels qualify.
pub fn refine_line(edges: &EdgeMap, line: &HoughLine, band: f64, iterations: usize) -> HoughLine {
    let mut current = *line;
    for _ in 0..iterations {
        let near: Vec<(f64, f64)> = edges
            .points()
            .map(|(x, y)| (x as f64, y as f64))
            .filter(|&(x, y)| current.distance(x, y).abs() <= band)
            .collect();
        if near.len() < 2 {
            break;
        }
        let n = near.len() as f64;
        let (mx, my) = near
            .iter()
            .fold((0.0, 0.0), |(ax, ay), &(x, y)| (ax + x / n, ay + y / n));
        let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
        for &(x, y) in &near {
            let (dx, dy) = (x - mx, y - my);
            sxx += dx * dx;
            syy += dy * dy;
            sxy += dx * dy;
        }
        let direction = 0.5 * (2.0 * sxy).atan2(sxx - syy);
        let mut theta = direction + FRAC_PI_2;
        theta = theta.rem_euclid(std::f64::consts::PI);
        current = HoughLine {
            rho: mx * theta.cos() + my * theta.sin(),
            theta,
            votes: line.votes,
        };
    }
    current
}
