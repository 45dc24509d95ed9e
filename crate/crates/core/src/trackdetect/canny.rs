use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::DetectError;
use crate::imagecore::{gaussian_blur, GrayImage};
use crate::scalar::Real;

/// Binary edge mask, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeMap {
    width: u32,
    height: u32,
    edges: Vec<bool>,
}

impl EdgeMap {
    pub fn empty(width: u32, height: u32) -> Self {
        EdgeMap {
            width,
            height,
            edges: vec![false; width as usize * height as usize],
        }
    }

    pub fn from_points(width: u32, height: u32, points: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut map = Self::empty(width, height);
        for (x, y) in points {
            map.set(x, y, true);
        }
        map
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.edges[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        let w = self.width as usize;
        self.edges[y as usize * w + x as usize] = v;
    }

    pub fn count(&self) -> usize {
        self.edges.iter().filter(|&&e| e).count()
    }

    /// Edge pixel coordinates in row-major order.
    pub fn points(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width;
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, &e)| e)
            .map(move |(i, _)| (i as u32 % w, i as u32 / w))
    }

    /// True when every edge of `self` is also an edge of `other`.
    pub fn is_subset_of(&self, other: &EdgeMap) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.edges.iter().zip(&other.edges).all(|(&a, &b)| !a || b)
    }
}

/// Every intermediate buffer of one Canny run.
#[derive(Debug, Clone)]
pub struct CannyStages<T: Real> {
    pub blurred: GrayImage<T>,
    pub gx: Vec<T>,
    pub gy: Vec<T>,
    pub magnitude: Vec<T>,
    /// Magnitude after non-maximum suppression (zero where suppressed).
    pub suppressed: Vec<T>,
    pub edges: EdgeMap,
}

pub fn canny<T: Real>(
    img: &GrayImage<T>,
    low: T,
    high: T,
    blur_sigma: T,
    blur_radius: u32,
) -> Result<EdgeMap, DetectError> {
    canny_stages(img, low, high, blur_sigma, blur_radius).map(|s| s.edges)
}

/// Blur, Sobel gradients, 4-sector non-maximum suppression and 8-connected
/// double-threshold hysteresis.
pub fn canny_stages<T: Real>(
    img: &GrayImage<T>,
    low: T,
    high: T,
    blur_sigma: T,
    blur_radius: u32,
) -> Result<CannyStages<T>, DetectError> {
    if !(low > T::zero() && low < high) {
        return Err(DetectError::InvalidParameter(format!(
            "canny thresholds need 0 < low < high, got low={low:?} high={high:?}"
        )));
    }
    let blurred = gaussian_blur(img, blur_sigma, blur_radius)?;
    let (gx, gy) = sobel(&blurred);
    let magnitude: Vec<T> = gx.iter().zip(&gy).map(|(&x, &y)| x.hypot(y)).collect();
    let (w, h) = (img.width(), img.height());
    let suppressed = non_maximum_suppression(w, h, &magnitude, &gx, &gy);
    let edges = hysteresis(w, h, &suppressed, low, high);
    Ok(CannyStages {
        blurred,
        gx,
        gy,
        magnitude,
        suppressed,
        edges,
    })
}

fn sobel<T: Real>(img: &GrayImage<T>) -> (Vec<T>, Vec<T>) {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let two = T::two();
    let mut gx = Vec::with_capacity((w * h) as usize);
    let mut gy = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        for x in 0..w {
            let p = |dx: i64, dy: i64| img.get_clamped(x + dx, y + dy);
            let sx = (p(1, -1) + two * p(1, 0) + p(1, 1)) - (p(-1, -1) + two * p(-1, 0) + p(-1, 1));
            let sy = (p(-1, 1) + two * p(0, 1) + p(1, 1)) - (p(-1, -1) + two * p(0, -1) + p(1, -1));
            gx.push(sx);
            gy.push(sy);
        }
    }
    (gx, gy)
}

/// Keeps a pixel only if it dominates its two neighbours along the quantized
/// gradient direction. Plateaus are thinned by requiring a strict win over the
/// neighbour on the positive side, so a symmetric two-pixel ridge keeps exactly
/// one pixel. The one-pixel frame border is always suppressed.
fn non_maximum_suppression<T: Real>(w: u32, h: u32, mag: &[T], gx: &[T], gy: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); mag.len()];
    if w < 3 || h < 3 {
        return out;
    }
    let idx = |x: u32, y: u32| y as usize * w as usize + x as usize;
    let (d22, d67, d112, d157) = (T::lit(22.5), T::lit(67.5), T::lit(112.5), T::lit(157.5));
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let i = idx(x, y);
            let m = mag[i];
            if m == T::zero() {
                continue;
            }
            let mut angle = gy[i].atan2(gx[i]).to_degrees();
            if angle < T::zero() {
                angle = angle + T::lit(180.0);
            }
            // (negative side, positive side) along the gradient, image y pointing down
            let (behind, ahead) = if angle < d22 || angle >= d157 {
                (idx(x - 1, y), idx(x + 1, y))
            } else if angle < d67 {
                (idx(x - 1, y - 1), idx(x + 1, y + 1))
            } else if angle < d112 {
                (idx(x, y - 1), idx(x, y + 1))
            } else {
                (idx(x + 1, y - 1), idx(x - 1, y + 1))
            };
            if m >= mag[behind] && m > mag[ahead] {
                out[i] = m;
            }
        }
    }
    out
}

fn hysteresis<T: Real>(w: u32, h: u32, nms: &[T], low: T, high: T) -> EdgeMap {
    let mut map = EdgeMap::empty(w, h);
    let mut queue = VecDeque::new();
    for (i, &v) in nms.iter().enumerate() {
        if v >= high {
            map.edges[i] = true;
            queue.push_back(i);
        }
    }
    let (wi, hi) = (w as i64, h as i64);
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w as usize) as i64, (i / w as usize) as i64);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if (dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= wi || ny >= hi {
                    continue;
                }
                let j = (ny * wi + nx) as usize;
                if !map.edges[j] && nms[j] >= low {
                    map.edges[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn step_image() -> GrayImage<f64> {
        GrayImage::from_fn(16, 16, |x, _| if x < 8 { 0.0 } else { 255.0 }).unwrap()
    }

    #[test]
    fn constant_image_has_no_edges() {
        let img = GrayImage::filled(32, 32, 77.0).unwrap();
        assert_eq!(canny(&img, 50.0, 100.0, 1.4, 2).unwrap().count(), 0);
    }

    #[test]
    fn vertical_step_gives_single_column() {
        let edges = canny(&step_image(), 50.0, 100.0, 1.4, 2).unwrap();
        let mut columns = std::collections::BTreeSet::new();
        for y in 1..15 {
            let row: Vec<u32> = (0..16).filter(|&x| edges.get(x, y)).collect();
            assert_eq!(row.len(), 1, "row {y}: {row:?}");
            columns.insert(row[0]);
        }
        assert_eq!(columns.len(), 1);
        let col = *columns.iter().next().unwrap();
        assert!(col == 7 || col == 8);
    }

    #[test]
    fn f32_agrees_on_step() {
        let img32 = GrayImage::<f32>::from_fn(16, 16, |x, _| if x < 8 { 0.0 } else { 255.0 }).unwrap();
        let a = canny(&img32, 50.0, 100.0, 1.4, 2).unwrap();
        for y in 1..15 {
            assert_eq!((0..16).filter(|&x| a.get(x, y)).count(), 1);
        }
    }

    #[test]
    fn thresholds_validated() {
        let img = step_image();
        assert!(canny(&img, 100.0, 100.0, 1.4, 2).is_err());
        assert!(canny(&img, 0.0, 100.0, 1.4, 2).is_err());
    }

    #[test]
    fn edges_meet_low_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let img = GrayImage::from_fn(40, 30, |_, _| rng.random_range(0.0..255.0)).unwrap();
        let st = canny_stages(&img, 40.0, 120.0, 1.0, 1).unwrap();
        for (x, y) in st.edges.points() {
            let i = (y * 40 + x) as usize;
            assert!(st.magnitude[i] >= 40.0);
            assert!(st.suppressed[i] >= 40.0);
        }
    }
}
