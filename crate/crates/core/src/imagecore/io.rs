use std::fs;
use std::io::Cursor;
use std::path::Path;

use image::{ImageFormat, ImageReader};

use super::{ImageError, RgbImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Png,
    Ppm,
}

fn format_for(path: &Path) -> Result<Format, ImageError> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "png" => Ok(Format::Png),
        "ppm" => Ok(Format::Ppm),
        _ => Err(ImageError::UnsupportedFormat(path.display().to_string())),
    }
}

/// Reads a PNG or binary PPM (P6, maxval 255), chosen by file extension.
pub fn read_image(path: impl AsRef<Path>) -> Result<RgbImage, ImageError> {
    let path = path.as_ref();
    let format = format_for(path)?;
    let bytes = fs::read(path).map_err(|source| ImageError::Unreadable {
        path: path.display().to_string(),
        source,
    })?;
    if bytes.is_empty() {
        return Err(ImageError::MalformedHeader("empty file".into()));
    }
    match format {
        Format::Ppm => decode_ppm(&bytes),
        Format::Png => decode_png(&bytes),
    }
}

pub fn write_image(img: &RgbImage, path: impl AsRef<Path>) -> Result<(), ImageError> {
    let path = path.as_ref();
    let bytes = match format_for(path)? {
        Format::Ppm => encode_ppm(img),
        Format::Png => encode_png(img)?,
    };
    fs::write(path, bytes).map_err(|source| ImageError::Unwritable {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.as_raw().len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(img.as_raw());
    out
}

pub(crate) fn decode_ppm(bytes: &[u8]) -> Result<RgbImage, ImageError> {
    let mut pos = 0usize;
    let magic = header_token(bytes, &mut pos)?;
    if magic != b"P6" {
        return Err(ImageError::MalformedHeader(format!(
            "bad magic {:?}",
            String::from_utf8_lossy(magic)
        )));
    }
    let width = header_number(bytes, &mut pos, "width")?;
    let height = header_number(bytes, &mut pos, "height")?;
    let maxval = header_number(bytes, &mut pos, "maxval")?;
    if maxval != 255 {
        return Err(ImageError::MalformedHeader(format!("unsupported maxval {maxval}")));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(ImageError::MalformedHeader("missing raster separator".into())),
    }
    if width == 0 || height == 0 {
        return Err(ImageError::MalformedHeader(format!("zero dimension {width}x{height}")));
    }
    let expected = width as usize * height as usize * 3;
    let body = &bytes[pos..];
    if body.len() < expected {
        return Err(ImageError::TruncatedData {
            expected,
            found: body.len(),
        });
    }
    RgbImage::from_raw(width, height, body[..expected].to_vec())
}

fn header_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8], ImageError> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(ImageError::MalformedHeader("unexpected end of header".into()));
    }
    Ok(&bytes[start..*pos])
}

fn header_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<u32, ImageError> {
    let tok = header_token(bytes, pos)?;
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse::<u32>().ok())
        .ok_or_else(|| ImageError::MalformedHeader(format!("bad {what} {:?}", String::from_utf8_lossy(tok))))
}

fn encode_png(img: &RgbImage) -> Result<Vec<u8>, ImageError> {
    let buf = image::RgbImage::from_raw(img.width(), img.height(), img.as_raw().to_vec())
        .ok_or_else(|| ImageError::Png("buffer size mismatch".into()))?;
    let mut out = Cursor::new(Vec::new());
    buf.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| ImageError::Png(e.to_string()))?;
    Ok(out.into_inner())
}

fn decode_png(bytes: &[u8]) -> Result<RgbImage, ImageError> {
    const SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";
    if !bytes.starts_with(SIGNATURE) {
        return Err(ImageError::MalformedHeader("missing PNG signature".into()));
    }
    let decoded = ImageReader::with_format(Cursor::new(bytes), ImageFormat::Png)
        .decode()
        .map_err(|e| ImageError::Png(e.to_string()))?;
    let rgb = decoded.into_rgb8();
    let (w, h) = rgb.dimensions();
    RgbImage::from_raw(w, h, rgb.into_raw())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(seed: u64, w: u32, h: u32) -> RgbImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..w * h * 3).map(|_| rng.random()).collect();
        RgbImage::from_raw(w, h, data).unwrap()
    }

    #[test]
    fn ppm_header_is_exact() {
        let img = RgbImage::filled(2, 1, [7, 8, 9]).unwrap();
        assert_eq!(encode_ppm(&img), b"P6\n2 1\n255\n\x07\x08\x09\x07\x08\x09".to_vec());
    }

    #[test]
    fn file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let img = random_image(3, 16, 16);
        for name in ["a.ppm", "a.png"] {
            let p = dir.path().join(name);
            write_image(&img, &p).unwrap();
            assert_eq!(read_image(&p).unwrap(), img, "{name}");
        }
    }

    #[test]
    fn distinct_read_errors() {
        let dir = tempfile::tempdir().unwrap();
        let empty = dir.path().join("empty.ppm");
        fs::write(&empty, b"").unwrap();
        assert!(matches!(read_image(&empty), Err(ImageError::MalformedHeader(_))));
        let empty_png = dir.path().join("empty.png");
        fs::write(&empty_png, b"").unwrap();
        assert!(matches!(read_image(&empty_png), Err(ImageError::MalformedHeader(_))));

        let short = dir.path().join("short.ppm");
        fs::write(&short, b"P6\n4 4\n255\n\x00\x01").unwrap();
        assert!(matches!(
            read_image(&short),
            Err(ImageError::TruncatedData { expected: 48, found: 2 })
        ));

        let missing = dir.path().join("nope.ppm");
        assert!(matches!(read_image(&missing), Err(ImageError::Unreadable { .. })));

        assert!(matches!(
            decode_ppm(b"P3\n1 1\n255\n"),
            Err(ImageError::MalformedHeader(_))
        ));
        assert!(matches!(
            decode_ppm(b"P6\n1 1\n65535\n"),
            Err(ImageError::MalformedHeader(_))
        ));
    }

    #[test]
    fn ppm_comments_are_skipped() {
        let img = decode_ppm(b"P6 # made by hand\n1 1\n255\n\x01\x02\x03").unwrap();
        assert_eq!(img.get(0, 0), [1, 2, 3]);
    }

    proptest! {
        #[test]
        fn ppm_round_trip_is_bit_exact(w in 1u32..24, h in 1u32..24, seed in any::<u64>()) {
            let img = random_image(seed, w, h);
            prop_assert_eq!(decode_ppm(&encode_ppm(&img)).unwrap(), img);
        }
    }
}
