//! Raster buffers and the per-pixel primitives the rest of the crate builds on.

mod io;

pub use io::{read_image, write_image};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("invalid dimensions {width}x{height}")]
    InvalidDimensions { width: u32, height: u32 },
    #[error("buffer length {actual} does not match {expected}")]
    BufferLength { expected: usize, actual: usize },
    #[error("kernel exceeds image")]
    KernelExceedsImage,
    #[error("invalid blur parameters: {0}")]
    InvalidBlur(String),
    #[error("rect {rect:?} out of bounds for {width}x{height} image")]
    OutOfBounds { rect: Rect, width: u32, height: u32 },
    #[error("cannot read {path}: {source}")]
    Unreadable {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Unwritable {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("truncated pixel data: expected {expected} bytes, found {found}")]
    TruncatedData { expected: usize, found: usize },
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("png codec: {0}")]
    Png(String),
}

/// Axis-aligned rectangle in pixel units; `(x, y)` is the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl Rect {
    pub fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        Rect { x, y, w, h }
    }

    pub fn right(&self) -> u32 {
        self.x + self.w
    }

    pub fn bottom(&self) -> u32 {
        self.y + self.h
    }

    pub fn fits_within(&self, width: u32, height: u32) -> bool {
        self.w > 0
            && self.h > 0
            && (self.x as u64 + self.w as u64) <= width as u64
            && (self.y as u64 + self.h as u64) <= height as u64
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= self.x as i64 && y >= self.y as i64 && x < self.right() as i64 && y < self.bottom() as i64
    }

    /// Containment test for real-valued points (half-open on the far edges).
    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        x >= self.x as f64 && y >= self.y as f64 && x < self.right() as f64 && y < self.bottom() as f64
    }
}

/// 8-bit RGB raster, row-major, three bytes per pixel.
#[derive(Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl std::fmt::Debug for RgbImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RgbImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl RgbImage {
    pub fn new(width: u32, height: u32) -> Result<Self, ImageError> {
        Self::filled(width, height, [0, 0, 0])
    }

    pub fn filled(width: u32, height: u32, color: [u8; 3]) -> Result<Self, ImageError> {
        check_dims(width, height)?;
        let n = width as usize * height as usize;
        let mut data = Vec::with_capacity(n * 3);
        for _ in 0..n {
            data.extend_from_slice(&color);
        }
        Ok(RgbImage { width, height, data })
    }

    pub fn from_raw(width: u32, height: u32, data: Vec<u8>) -> Result<Self, ImageError> {
        check_dims(width, height)?;
        let expected = width as usize * height as usize * 3;
        if data.len() != expected {
            return Err(ImageError::BufferLength {
                expected,
                actual: data.len(),
            });
        }
        Ok(RgbImage { width, height, data })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    pub fn full_rect(&self) -> Rect {
        Rect::new(0, 0, self.width, self.height)
    }

    #[inline]
    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * 3
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = self.offset(x, y);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn put(&mut self, x: u32, y: u32, px: [u8; 3]) {
        let i = self.offset(x, y);
        self.data[i..i + 3].copy_from_slice(&px);
    }

    /// Signed-coordinate lookup; `None` outside the raster.
    pub fn get_checked(&self, x: i64, y: i64) -> Option<[u8; 3]> {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            None
        } else {
            Some(self.get(x as u32, y as u32))
        }
    }

    /// Writes the pixel if it lies inside the raster; silently ignores it otherwise.
    pub fn put_clipped(&mut self, x: i64, y: i64, px: [u8; 3]) {
        if x >= 0 && y >= 0 && x < self.width as i64 && y < self.height as i64 {
            self.put(x as u32, y as u32, px);
        }
    }

    pub fn pixels(&self) -> impl Iterator<Item = [u8; 3]> + '_ {
        self.data.chunks_exact(3).map(|c| [c[0], c[1], c[2]])
    }
}

/// Single-channel raster holding real intensities in `[0, 255]`.
///
/// Kept unquantized so that gradient computations see sub-integer detail.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage<T = f64> {
    width: u32,
    height: u32,
    data: Vec<T>,
}

impl<T: Real> GrayImage<T> {
    pub fn filled(width: u32, height: u32, value: T) -> Result<Self, ImageError> {
        check_dims(width, height)?;
        Ok(GrayImage {
            width,
            height,
            data: vec![value; width as usize * height as usize],
        })
    }

    pub fn from_raw(width: u32, height: u32, data: Vec<T>) -> Result<Self, ImageError> {
        check_dims(width, height)?;
        let expected = width as usize * height as usize;
        if data.len() != expected {
            return Err(ImageError::BufferLength {
                expected,
                actual: data.len(),
            });
        }
        Ok(GrayImage { width, height, data })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> T) -> Result<Self, ImageError> {
        check_dims(width, height)?;
        let mut data = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Ok(GrayImage { width, height, data })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> T {
        self.data[y as usize * self.width as usize + x as usize]
    }

    /// Clamp-to-edge lookup.
    #[inline]
    pub fn get_clamped(&self, x: i64, y: i64) -> T {
        let cx = x.clamp(0, self.width as i64 - 1) as u32;
        let cy = y.clamp(0, self.height as i64 - 1) as u32;
        self.get(cx, cy)
    }

    #[inline]
    pub fn put(&mut self, x: u32, y: u32, v: T) {
        let w = self.width as usize;
        self.data[y as usize * w + x as usize] = v;
    }

    /// Rounds every intensity into a byte and replicates it into an RGB raster.
    pub fn to_rgb(&self) -> RgbImage {
        let mut data = Vec::with_capacity(self.data.len() * 3);
        for &v in &self.data {
            let b = v.to_f64_lossy().round().clamp(0.0, 255.0) as u8;
            data.extend_from_slice(&[b, b, b]);
        }
        RgbImage {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

fn check_dims(width: u32, height: u32) -> Result<(), ImageError> {
    if width == 0 || height == 0 {
        Err(ImageError::InvalidDimensions { width, height })
    } else {
        Ok(())
    }
}

/// Rec.601 luma.
pub fn to_grayscale<T: Real>(img: &RgbImage) -> GrayImage<T> {
    let (wr, wg, wb) = (T::lit(0.299), T::lit(0.587), T::lit(0.114));
    let data = img
        .pixels()
        .map(|[r, g, b]| {
            let v = wr * T::lit(r as f64) + wg * T::lit(g as f64) + wb * T::lit(b as f64);
            v.max(T::zero()).min(T::lit(255.0))
        })
        .collect();
    GrayImage {
        width: img.width,
        height: img.height,
        data,
    }
}

/// Normalized 1-D Gaussian taps `exp(-k²/2σ²)/Z` for `k in -radius..=radius`.
pub fn gaussian_kernel<T: Real>(sigma: T, radius: u32) -> Vec<T> {
    let r = radius as i64;
    let two_sigma_sq = T::two() * sigma * sigma;
    let mut taps: Vec<T> = (-r..=r)
        .map(|k| {
            let k = T::lit(k as f64);
            (-(k * k) / two_sigma_sq).exp()
        })
        .collect();
    let z = taps.iter().fold(T::zero(), |acc, &t| acc + t);
    for t in &mut taps {
        *t = *t / z;
    }
    taps
}

/// Separable Gaussian blur with clamp-to-edge borders.
pub fn gaussian_blur<T: Real>(img: &GrayImage<T>, sigma: T, radius: u32) -> Result<GrayImage<T>, ImageError> {
    if !(sigma > T::zero()) || !sigma.is_finite() {
        return Err(ImageError::InvalidBlur(format!("sigma must be > 0, got {sigma:?}")));
    }
    if radius == 0 {
        return Err(ImageError::InvalidBlur("radius must be >= 1".into()));
    }
    let size = 2 * radius as u64 + 1;
    if size > img.width.min(img.height) as u64 {
        return Err(ImageError::KernelExceedsImage);
    }
    let kernel = gaussian_kernel(sigma, radius);
    let r = radius as i64;
    let (w, h) = (img.width, img.height);

    let mut horizontal = GrayImage::filled(w, h, T::zero())?;
    for y in 0..h {
        for x in 0..w {
            let mut acc = T::zero();
            for (i, &k) in kernel.iter().enumerate() {
                acc = acc + k * img.get_clamped(x as i64 + i as i64 - r, y as i64);
            }
            horizontal.put(x, y, acc);
        }
    }
    let mut out = GrayImage::filled(w, h, T::zero())?;
    for y in 0..h {
        for x in 0..w {
            let mut acc = T::zero();
            for (i, &k) in kernel.iter().enumerate() {
                acc = acc + k * horizontal.get_clamped(x as i64, y as i64 + i as i64 - r);
            }
            out.put(x, y, acc.max(T::zero()).min(T::lit(255.0)));
        }
    }
    Ok(out)
}

pub fn crop(img: &RgbImage, roi: Rect) -> Result<RgbImage, ImageError> {
    if !roi.fits_within(img.width, img.height) {
        return Err(ImageError::OutOfBounds {
            rect: roi,
            width: img.width,
            height: img.height,
        });
    }
    let mut data = Vec::with_capacity(roi.w as usize * roi.h as usize * 3);
    for y in roi.y..roi.bottom() {
        let start = img.offset(roi.x, y);
        data.extend_from_slice(&img.data[start..start + roi.w as usize * 3]);
    }
    Ok(RgbImage {
        width: roi.w,
        height: roi.h,
        data,
    })
}

pub fn flip_horizontal(img: &RgbImage) -> RgbImage {
    let mut out = img.clone();
    for y in 0..img.height {
        for x in 0..img.width {
            out.put(img.width - 1 - x, y, img.get(x, y));
        }
    }
    out
}

/// Adds `delta` to every channel, saturating at 0 and 255.
pub fn adjust_brightness(img: &RgbImage, delta: i32) -> RgbImage {
    let data = img
        .data
        .iter()
        .map(|&c| (c as i32 + delta).clamp(0, 255) as u8)
        .collect();
    RgbImage {
        width: img.width,
        height: img.height,
        data,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn px(img: &RgbImage) -> [u8; 3] {
        img.get(0, 0)
    }

    #[test]
    fn grayscale_luma() {
        let black = RgbImage::filled(1, 1, [0, 0, 0]).unwrap();
        let white = RgbImage::filled(1, 1, [255, 255, 255]).unwrap();
        let red = RgbImage::filled(1, 1, [255, 0, 0]).unwrap();
        assert_eq!(to_grayscale::<f64>(&black).get(0, 0), 0.0);
        assert!((to_grayscale::<f64>(&white).get(0, 0) - 255.0).abs() < 1e-9);
        assert!((to_grayscale::<f64>(&red).get(0, 0) - 76.245).abs() < 1e-9);
        assert!((to_grayscale::<f32>(&red).get(0, 0) - 76.245).abs() < 1e-4);
    }

    #[test]
    fn blur_keeps_constant() {
        let img = GrayImage::filled(9, 7, 100.0f64).unwrap();
        let out = gaussian_blur(&img, 1.4, 2).unwrap();
        assert!(out.as_slice().iter().all(|v| (v - 100.0).abs() < 1e-9));
    }

    #[test]
    fn blur_impulse_is_outer_product() {
        // oracle: taps computed directly from exp(-k^2 / 2 sigma^2) / Z
        let raw: Vec<f64> = (-2i32..=2).map(|k| (-(k * k) as f64 / 2.0).exp()).collect();
        let z: f64 = raw.iter().sum();
        let taps: Vec<f64> = raw.iter().map(|t| t / z).collect();

        let mut img = GrayImage::filled(7, 7, 0.0).unwrap();
        img.put(3, 3, 255.0);
        let out = gaussian_blur(&img, 1.0, 2).unwrap();
        for y in 0..7i32 {
            for x in 0..7i32 {
                let (dx, dy) = (x - 3, y - 3);
                let expected = if dx.abs() <= 2 && dy.abs() <= 2 {
                    255.0 * taps[(dx + 2) as usize] * taps[(dy + 2) as usize]
                } else {
                    0.0
                };
                assert!((out.get(x as u32, y as u32) - expected).abs() < 1e-9, "({x},{y})");
            }
        }
    }

    #[test]
    fn blur_kernel_too_large() {
        let img = GrayImage::filled(4, 10, 1.0).unwrap();
        assert!(matches!(
            gaussian_blur(&img, 1.0, 2),
            Err(ImageError::KernelExceedsImage)
        ));
        assert!(gaussian_blur(&img, 0.0, 1).is_err());
        assert!(gaussian_blur(&img, 1.0, 0).is_err());
    }

    #[test]
    fn crop_cases() {
        let img = RgbImage::filled(1920, 1080, [1, 2, 3]).unwrap();
        assert_eq!(crop(&img, img.full_rect()).unwrap(), img);
        let c = crop(&img, Rect::new(660, 780, 600, 300)).unwrap();
        assert_eq!((c.width(), c.height()), (600, 300));
        assert!(crop(&img, Rect::new(1400, 0, 600, 300)).is_err());
    }

    #[test]
    fn crop_maps_pixels() {
        let data: Vec<u8> = (0..4 * 3 * 3).map(|v| v as u8).collect();
        let img = RgbImage::from_raw(4, 3, data).unwrap();
        let c = crop(&img, Rect::new(1, 1, 2, 2)).unwrap();
        for j in 0..2 {
            for i in 0..2 {
                assert_eq!(c.get(i, j), img.get(1 + i, 1 + j));
            }
        }
    }

    #[test]
    fn flip_two_pixels() {
        let img = RgbImage::from_raw(2, 1, vec![1, 2, 3, 4, 5, 6]).unwrap();
        assert_eq!(flip_horizontal(&img).as_raw(), &[4, 5, 6, 1, 2, 3]);
        let sym = RgbImage::from_raw(3, 1, vec![9, 9, 9, 1, 1, 1, 9, 9, 9]).unwrap();
        assert_eq!(flip_horizontal(&sym), sym);
    }

    #[test]
    fn brightness_clamps() {
        let a = RgbImage::filled(1, 1, [100, 100, 100]).unwrap();
        assert_eq!(px(&adjust_brightness(&a, 10)), [110, 110, 110]);
        assert_eq!(adjust_brightness(&a, 0), a);
        let b = RgbImage::filled(1, 1, [250, 0, 128]).unwrap();
        assert_eq!(px(&adjust_brightness(&b, 20)), [255, 20, 148]);
    }

    #[test]
    fn rejects_bad_buffers() {
        assert!(RgbImage::from_raw(2, 2, vec![0; 11]).is_err());
        assert!(RgbImage::new(0, 3).is_err());
        assert!(GrayImage::<f64>::from_raw(2, 2, vec![0.0; 3]).is_err());
    }
}
