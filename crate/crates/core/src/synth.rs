//! Procedural forward-view track frames with known rail geometry.
//!
//! Frames show a textured ballast bed, perspective-spaced ties and two bright
//! rails meeting at a vanishing point, optionally with additive Gaussian
//! noise. They serve as ground truth for detection and injection checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::imagecore::{ImageError, RgbImage};
use crate::kinksim::draw_segment;
use crate::trackdetect::{LineSegment, Point};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackScene {
    pub width: u32,
    pub height: u32,
    pub vanishing_point: Point,
    /// Where the rail centerlines cross the bottom row.
    pub left_bottom_x: f64,
    pub right_bottom_x: f64,
    pub rail_thickness: u32,
    pub rail_color: [u8; 3],
    pub ballast_color: [u8; 3],
    pub tie_color: [u8; 3],
    pub ties: bool,
    /// Standard deviation of the per-channel additive noise, in intensity levels.
    pub noise_sigma: f64,
}

impl TrackScene {
    pub fn new(width: u32, height: u32, vanishing_point: Point, left_bottom_x: f64, right_bottom_x: f64) -> Self {
        TrackScene {
            width,
            height,
            vanishing_point,
            left_bottom_x,
            right_bottom_x,
            rail_thickness: 4,
            rail_color: [215, 210, 205],
            ballast_color: [105, 98, 90],
            tie_color: [70, 55, 45],
            ties: true,
            noise_sigma: 0.0,
        }
    }

    /// Random converging-rail scene: vanishing point in the upper-middle of the
    /// frame, rails entering through the bottom row.
    pub fn random(width: u32, height: u32, rng: &mut impl Rng) -> Self {
        let (w, h) = (width as f64, height as f64);
        let vp = Point::new(rng.random_range(0.4 * w..0.6 * w), rng.random_range(0.15 * h..0.35 * h));
        let left = rng.random_range(0.12 * w..0.32 * w);
        let right = rng.random_range(0.68 * w..0.88 * w);
        TrackScene::new(width, height, vp, left, right)
    }

    pub fn bottom(&self) -> f64 {
        self.height as f64 - 1.0
    }

    pub fn left_rail(&self) -> LineSegment {
        LineSegment::new(Point::new(self.left_bottom_x, self.bottom()), self.vanishing_point)
    }

    pub fn right_rail(&self) -> LineSegment {
        LineSegment::new(Point::new(self.right_bottom_x, self.bottom()), self.vanishing_point)
    }

    pub fn render(&self, seed: u64) -> Result<RgbImage, ImageError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut img = RgbImage::filled(self.width, self.height, self.ballast_color)?;

        // mild ballast texture
        for y in 0..self.height {
            for x in 0..self.width {
                let j: i32 = rng.random_range(-6..=6);
                let c = self.ballast_color.map(|v| (v as i32 + j).clamp(0, 255) as u8);
                img.put(x, y, c);
            }
        }

        if self.ties {
            self.draw_ties(&mut img);
        }
        for rail in [self.left_rail(), self.right_rail()] {
            img = draw_segment(&img, &rail, self.rail_color, self.rail_thickness);
        }

        if self.noise_sigma > 0.0 {
            let noise = Normal::new(0.0, self.noise_sigma).expect("finite sigma");
            let data = img
                .as_raw()
                .iter()
                .map(|&c| (c as f64 + noise.sample(&mut rng)).round().clamp(0.0, 255.0) as u8)
                .collect();
            img = RgbImage::from_raw(self.width, self.height, data)?;
        }
        Ok(img)
    }

    /// Horizontal ties whose spacing and depth shrink toward the vanishing point.
    fn draw_ties(&self, img: &mut RgbImage) {
        let vp = self.vanishing_point;
        let depth = self.bottom() - vp.y;
        if depth <= 1.0 {
            return;
        }
        let (left, right) = (self.left_rail(), self.right_rail());
        // in perspective, 1/(y - vp.y) is linear in distance along the track
        let mut inv = 1.0 / depth;
        let step = 0.35 / depth;
        loop {
            let dy = 1.0 / inv;
            let y = vp.y + dy;
            let thickness = (0.045 * dy).max(1.0);
            if dy < 12.0 {
                break;
            }
            let overhang = 0.25 * (right.x_at_y(y) - left.x_at_y(y));
            let x0 = left.x_at_y(y) - overhang;
            let x1 = right.x_at_y(y) + overhang;
            let y0 = (y - thickness / 2.0).round() as i64;
            let y1 = (y + thickness / 2.0).round() as i64;
            for yy in y0..=y1 {
                for xx in x0.round() as i64..=x1.round() as i64 {
                    img.put_clipped(xx, yy, self.tie_color);
                }
            }
            inv += step;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_is_deterministic() {
        let mut scene = TrackScene::new(320, 200, Point::new(160.0, 40.0), 60.0, 260.0);
        scene.noise_sigma = 20.0;
        assert_eq!(scene.render(4).unwrap(), scene.render(4).unwrap());
    }

    #[test]
    fn rails_are_bright() {
        let scene = TrackScene::new(320, 200, Point::new(160.0, 40.0), 60.0, 260.0);
        let img = scene.render(1).unwrap();
        assert_eq!(img.get(60, 199), scene.rail_color);
        assert_eq!(img.get(260, 199), scene.rail_color);
    }
}
