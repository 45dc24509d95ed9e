//! Diagnostic images for `detect --debug-dir`.

use railgen::kinksim::draw_segment;
use railgen::trackdetect::{DetectTrace, EdgeMap, HoughLine, LineSegment, Point};
use railgen::{Rect, RgbImage};

const POSITIVE: [u8; 3] = [230, 70, 60];
const NEGATIVE: [u8; 3] = [60, 130, 240];
const DISCARDED: [u8; 3] = [140, 140, 140];
const RAIL: [u8; 3] = [250, 220, 40];
const ROI: [u8; 3] = [40, 220, 90];

pub fn edge_image(edges: &EdgeMap) -> RgbImage {
    let mut img = RgbImage::new(edges.width(), edges.height()).expect("edge map has positive size");
    for (x, y) in edges.points() {
        img.put(x, y, [255, 255, 255]);
    }
    img
}

/// The part of `line` inside a `w`×`h` window, offset by `origin`.
fn clip(line: &HoughLine, w: u32, h: u32, origin: (u32, u32)) -> Option<LineSegment> {
    let (c, s) = (line.theta.cos(), line.theta.sin());
    let (xmax, ymax) = (w as f64 - 1.0, h as f64 - 1.0);
    let mut hits = Vec::new();
    if s.abs() > 1e-12 {
        for x in [0.0, xmax] {
            let y = (line.rho - x * c) / s;
            if (0.0..=ymax).contains(&y) {
                hits.push(Point::new(x, y));
            }
        }
    }
    if c.abs() > 1e-12 {
        for y in [0.0, ymax] {
            let x = (line.rho - y * s) / c;
            if (0.0..=xmax).contains(&x) {
                hits.push(Point::new(x, y));
            }
        }
    }
    let (mut best, mut len) = (None, -1.0);
    for (i, a) in hits.iter().enumerate() {
        for b in &hits[i + 1..] {
            if a.dist(*b) > len {
                len = a.dist(*b);
                best = Some((*a, *b));
            }
        }
    }
    let (ox, oy) = (origin.0 as f64, origin.1 as f64);
    best.map(|(a, b)| LineSegment::new(Point::new(a.x + ox, a.y + oy), Point::new(b.x + ox, b.y + oy)))
}

fn outline(img: RgbImage, r: Rect, color: [u8; 3]) -> RgbImage {
    let (x0, y0) = (r.x as f64, r.y as f64);
    let (x1, y1) = (r.right() as f64 - 1.0, r.bottom() as f64 - 1.0);
    let corners = [
        Point::new(x0, y0),
        Point::new(x1, y0),
        Point::new(x1, y1),
        Point::new(x0, y1),
    ];
    (0..4).fold(img, |img, i| {
        draw_segment(&img, &LineSegment::new(corners[i], corners[(i + 1) % 4]), color, 1)
    })
}

/// The frame with every Hough peak colored by slope group, and the selected
/// rails and region of interest on top when detection succeeded.
pub fn hough_overlay(frame: &RgbImage, trace: &DetectTrace) -> RgbImage {
    let (w, h) = (trace.edges.width(), trace.edges.height());
    let mut img = frame.clone();
    for (lines, color) in [
        (&trace.groups.discarded, DISCARDED),
        (&trace.groups.negative, NEGATIVE),
        (&trace.groups.positive, POSITIVE),
    ] {
        for line in lines {
            if let Some(seg) = clip(line, w, h, trace.origin) {
                img = draw_segment(&img, &seg, color, 1);
            }
        }
    }
    if let Ok(g) = &trace.geometry {
        img = draw_segment(&img, &g.left_rail, RAIL, 3);
        img = draw_segment(&img, &g.right_rail, RAIL, 3);
        img = outline(img, g.roi, ROI);
    }
    img
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clipping_spans_the_window() {
        let horizontal = HoughLine {
            rho: 5.0,
            theta: std::f64::consts::FRAC_PI_2,
            votes: 1,
        };
        let seg = clip(&horizontal, 20, 10, (3, 4)).unwrap();
        let (a, b) = if seg.p0.x < seg.p1.x {
            (seg.p0, seg.p1)
        } else {
            (seg.p1, seg.p0)
        };
        assert!((a.x - 3.0).abs() < 1e-9 && (b.x - 22.0).abs() < 1e-9);
        assert!((a.y - 9.0).abs() < 1e-9 && (b.y - 9.0).abs() < 1e-9);

        let outside = HoughLine {
            rho: 50.0,
            theta: 0.0,
            votes: 1,
        };
        assert!(clip(&outside, 20, 10, (0, 0)).is_none());
    }
}
