//! Raster I/O: PNG / PGM / PPM / PFM in, PFM float maps and 8-bit PNG
//! heatmaps and masks out.
//!
//! Heatmaps use a fixed five-stop colormap, interpolated linearly between
//! black, deep purple, crimson, orange and pale yellow (see
//! [`heatmap_color`]). The value range is written next to the PNG as
//! `<name>.range.txt` holding `min max`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ExtendedColorType, ImageError, ImageFormat, ImageReader};

use super::{Image, Mask, Plane};
use crate::error::{Error, Result};

const HEATMAP_STOPS: [(f64, [u8; 3]); 5] = [
    (0.0, [0, 0, 4]),
    (0.25, [87, 16, 110]),
    (0.5, [188, 55, 84]),
    (0.75, [249, 142, 9]),
    (1.0, [252, 255, 164]),
];

/// Loads a raster, scaling integer samples to [0, 1]. PFM samples are taken
/// as stored. Alpha channels are dropped.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = read_existing(path)?;
    if bytes.starts_with(b"PF") || bytes.starts_with(b"Pf") {
        return parse_pfm(&bytes, path);
    }
    let reader = ImageReader::new(std::io::Cursor::new(&bytes))
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    if reader.format().is_none() {
        return Err(Error::UnsupportedFormat(format!(
            "{}: unrecognised raster signature",
            path.display()
        )));
    }
    let decoded = reader.decode().map_err(|e| decode_error(path, e))?;
    Ok(dynamic_to_image(decoded))
}

/// Loads a ground-truth mask; samples above 127 (of 255) are set.
pub fn load_mask(path: impl AsRef<Path>) -> Result<Mask> {
    let path = path.as_ref();
    let img = load_image(path)?;
    let plane = img.channel(0);
    let data = plane.data().iter().map(|&v| v * 255.0 > 127.0).collect();
    Mask::new(plane.height(), plane.width(), data)
}

fn read_existing(path: &Path) -> Result<Vec<u8>> {
    match fs::read(path) {
        Ok(b) => Ok(b),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(Error::NotFound(path.into())),
        Err(e) => Err(Error::io(path, e)),
    }
}

fn decode_error(path: &Path, e: ImageError) -> Error {
    match e {
        ImageError::Unsupported(u) => Error::UnsupportedFormat(format!("{}: {u}", path.display())),
        other => Error::Corrupt {
            path: path.into(),
            reason: other.to_string(),
        },
    }
}

fn dynamic_to_image(img: DynamicImage) -> Image {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let gray_u8 = |buf: &[u8], stride: usize, channels: usize| -> Vec<Plane> {
        (0..channels)
            .map(|c| Plane::from_fn(h, w, |r, col| buf[(r * w + col) * stride + c] as f64 / 255.0))
            .collect()
    };
    let gray_u16 = |buf: &[u16], stride: usize, channels: usize| -> Vec<Plane> {
        (0..channels)
            .map(|c| Plane::from_fn(h, w, |r, col| buf[(r * w + col) * stride + c] as f64 / 65535.0))
            .collect()
    };
    let planes = match &img {
        DynamicImage::ImageLuma8(b) => gray_u8(b.as_raw(), 1, 1),
        DynamicImage::ImageLumaA8(b) => gray_u8(b.as_raw(), 2, 1),
        DynamicImage::ImageRgb8(b) => gray_u8(b.as_raw(), 3, 3),
        DynamicImage::ImageRgba8(b) => gray_u8(b.as_raw(), 4, 3),
        DynamicImage::ImageLuma16(b) => gray_u16(b.as_raw(), 1, 1),
        DynamicImage::ImageLumaA16(b) => gray_u16(b.as_raw(), 2, 1),
        DynamicImage::ImageRgb16(b) => gray_u16(b.as_raw(), 3, 3),
        DynamicImage::ImageRgba16(b) => gray_u16(b.as_raw(), 4, 3),
        other => {
            let rgb = other.to_rgb32f();
            let buf = rgb.as_raw();
            (0..3)
                .map(|c| Plane::from_fn(h, w, |r, col| buf[(r * w + col) * 3 + c] as f64))
                .collect()
        }
    };
    Image::from_planes(planes).expect("decoded samples are finite")
}

/// Reads a PFM file (1 or 3 channels, either byte order).
pub fn load_pfm(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = read_existing(path)?;
    parse_pfm(&bytes, path)
}

fn parse_pfm(bytes: &[u8], path: &Path) -> Result<Image> {
    let corrupt = |reason: &str| Error::Corrupt {
        path: path.into(),
        reason: reason.to_string(),
    };
    // Header: three whitespace-separated tokens after the magic, then one
    // whitespace byte before the raster.
    let mut pos = 0;
    let mut tokens = Vec::with_capacity(4);
    while tokens.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(corrupt("truncated PFM header"));
        }
        let tok = std::str::from_utf8(&bytes[start..pos]).map_err(|_| corrupt("non-ASCII PFM header"))?;
        tokens.push(tok.to_string());
    }
    pos += 1;
    let channels = match tokens[0].as_str() {
        "Pf" => 1,
        "PF" => 3,
        _ => return Err(corrupt("bad PFM magic")),
    };
    let width: usize = tokens[1].parse().map_err(|_| corrupt("bad PFM width"))?;
    let height: usize = tokens[2].parse().map_err(|_| corrupt("bad PFM height"))?;
    let scale: f64 = tokens[3].parse().map_err(|_| corrupt("bad PFM scale"))?;
    if width == 0 || height == 0 || scale == 0.0 || !scale.is_finite() {
        return Err(corrupt("invalid PFM dimensions or scale"));
    }
    let little_endian = scale < 0.0;
    let needed = width * height * channels * 4;
    let raster = bytes.get(pos..).unwrap_or(&[]);
    if raster.len() < needed {
        return Err(corrupt("truncated PFM raster"));
    }
    let mut planes: Vec<Vec<f64>> = vec![vec![0.0; width * height]; channels];
    for (i, chunk) in raster[..needed].chunks_exact(4).enumerate() {
        let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little_endian {
            f32::from_le_bytes(raw)
        } else {
            f32::from_be_bytes(raw)
        };
        let pixel = i / channels;
        let c = i % channels;
        // rows are stored bottom to top
        let file_row = pixel / width;
        let col = pixel % width;
        let row = height - 1 - file_row;
        planes[c][row * width + col] = v as f64;
    }
    let planes = planes
        .into_iter()
        .map(|d| Plane::new(height, width, d))
        .collect::<Result<Vec<_>>>()?;
    Image::from_planes(planes).map_err(|_| corrupt("non-finite PFM samples"))
}

/// Writes a single-channel little-endian PFM (scale −1.0). Samples are stored
/// as `f32`; values already representable in `f32` round-trip bit-exactly.
pub fn save_float_map(map: &Plane, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (h, w) = map.dims();
    let mut out = Vec::with_capacity(32 + h * w * 4);
    write!(out, "Pf\n{w} {h}\n-1.0\n").expect("write to vec");
    for row in (0..h).rev() {
        for &v in map.row(row) {
            let f = v as f32;
            if !f.is_finite() {
                return Err(Error::Contract(format!(
                    "float map sample {v} is not finite in f32"
                )));
            }
            out.extend_from_slice(&f.to_le_bytes());
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// RGB color of `t ∈ [0, 1]` under the heatmap colormap.
pub fn heatmap_color(t: f64) -> [u8; 3] {
    let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
    for pair in HEATMAP_STOPS.windows(2) {
        let (t0, c0) = pair[0];
        let (t1, c1) = pair[1];
        if t <= t1 {
            let f = (t - t0) / (t1 - t0);
            let mut rgb = [0u8; 3];
            for i in 0..3 {
                rgb[i] = (c0[i] as f64 + f * (c1[i] as f64 - c0[i] as f64)).round() as u8;
            }
            return rgb;
        }
    }
    HEATMAP_STOPS[HEATMAP_STOPS.len() - 1].1
}

/// `dir/name.png` → `dir/name.range.txt`.
pub fn range_sidecar_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.range.txt"))
}

/// Writes `map` as an 8-bit RGB PNG, normalised to its own min/max. A
/// constant map is drawn entirely in the colormap's midpoint color.
pub fn save_heatmap(map: &Plane, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let finite = map.data().iter().copied().filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 0.0) };
    let span = hi - lo;
    let mut buf = Vec::with_capacity(map.len() * 3);
    for &v in map.data() {
        let t = if span > 0.0 { (v - lo) / span } else { 0.5 };
        buf.extend_from_slice(&heatmap_color(t));
    }
    write_png(path, &buf, map.width(), map.height(), ExtendedColorType::Rgb8)?;
    let sidecar = range_sidecar_path(path);
    fs::write(&sidecar, format!("{lo} {hi}\n")).map_err(|e| Error::io(sidecar, e))
}

/// Writes `map` as an 8-bit grayscale PNG, mapping [0, 1] to [0, 255] and
/// clamping outside it.
pub fn save_gray(map: &Plane, path: impl AsRef<Path>) -> Result<()> {
    let buf: Vec<u8> = map
        .data()
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    write_png(path.as_ref(), &buf, map.width(), map.height(), ExtendedColorType::L8)
}

/// Writes a mask as an 8-bit grayscale PNG with values {0, 255}.
pub fn save_mask(mask: &Mask, path: impl AsRef<Path>) -> Result<()> {
    let buf: Vec<u8> = mask.data().iter().map(|&b| if b { 255 } else { 0 }).collect();
    write_png(path.as_ref(), &buf, mask.width(), mask.height(), ExtendedColorType::L8)
}

fn write_png(path: &Path, buf: &[u8], w: usize, h: usize, color: ExtendedColorType) -> Result<()> {
    image::save_buffer_with_format(path, buf, w as u32, h as u32, color, ImageFormat::Png).map_err(
        |e| match e {
            ImageError::IoError(io) => Error::io(path, io),
            other => Error::io(path, std::io::Error::other(other.to_string())),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn gray_and_rgb_png() {
        let dir = tmp();
        let gray: Vec<u8> = (0..64 * 64).map(|i| (i % 256) as u8).collect();
        let p = dir.path().join("g.png");
        image::save_buffer(&p, &gray, 64, 64, ExtendedColorType::L8).unwrap();
        let img = load_image(&p).unwrap();
        assert_eq!((img.channels(), img.height(), img.width()), (1, 64, 64));
        assert!(img.channel(0).max() <= 1.0);
        assert_eq!(img.get(0, 0, 255), 1.0);

        let rgb: Vec<u8> = (0..8 * 5 * 3).map(|i| (i * 3 % 256) as u8).collect();
        let p = dir.path().join("c.png");
        image::save_buffer(&p, &rgb, 8, 5, ExtendedColorType::Rgb8).unwrap();
        let img = load_image(&p).unwrap();
        assert_eq!((img.channels(), img.height(), img.width()), (3, 5, 8));
        assert_eq!(img.get(1, 0, 0), 3.0 / 255.0);

        let g16: Vec<u8> = [0u16, 65535, 32768, 1].iter().flat_map(|v| v.to_ne_bytes()).collect();
        let p = dir.path().join("g16.png");
        image::save_buffer(&p, &g16, 2, 2, ExtendedColorType::L16).unwrap();
        let img = load_image(&p).unwrap();
        assert_eq!(img.get(0, 0, 1), 1.0);
    }

    #[test]
    fn pnm_input() {
        let dir = tmp();
        let p = dir.path().join("a.pgm");
        let mut bytes = b"P5\n3 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 51, 102, 153, 204, 255]);
        fs::write(&p, bytes).unwrap();
        let img = load_image(&p).unwrap();
        assert_eq!(img.dims(), (2, 3));
        assert!((img.get(0, 1, 2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn error_kinds() {
        let dir = tmp();
        assert!(matches!(load_image(dir.path().join("missing.png")), Err(Error::NotFound(_))));

        let p = dir.path().join("junk.bin");
        fs::write(&p, b"definitely not an image").unwrap();
        assert!(matches!(load_image(&p), Err(Error::UnsupportedFormat(_))));

        let gray = vec![7u8; 64 * 64];
        let good = dir.path().join("t.png");
        image::save_buffer(&good, &gray, 64, 64, ExtendedColorType::L8).unwrap();
        let bytes = fs::read(&good).unwrap();
        let cut = dir.path().join("cut.png");
        fs::write(&cut, &bytes[..bytes.len() / 2]).unwrap();
        assert!(matches!(load_image(&cut), Err(Error::Corrupt { .. })));

        let pfm = dir.path().join("cut.pfm");
        fs::write(&pfm, b"Pf\n4 4\n-1.0\n\0\0\0\0").unwrap();
        assert!(matches!(load_image(&pfm), Err(Error::Corrupt { .. })));
    }

    #[test]
    fn heatmap_constant_and_sidecar() {
        let dir = tmp();
        let p = dir.path().join("heat.png");
        save_heatmap(&Plane::filled(4, 6, 3.5), &p).unwrap();
        let img = image::open(&p).unwrap().to_rgb8();
        let mid = heatmap_color(0.5);
        assert!(img.pixels().all(|px| px.0 == mid));
        let range = fs::read_to_string(dir.path().join("heat.range.txt")).unwrap();
        assert_eq!(range.trim(), "3.5 3.5");

        let ramp = Plane::from_fn(2, 2, |r, c| (r * 2 + c) as f64);
        save_heatmap(&ramp, &p).unwrap();
        let img = image::open(&p).unwrap().to_rgb8();
        assert_eq!(img.get_pixel(0, 0).0, heatmap_color(0.0));
        assert_eq!(img.get_pixel(1, 1).0, heatmap_color(1.0));
    }

    #[test]
    fn mask_png() {
        let dir = tmp();
        let p = dir.path().join("m.png");
        save_mask(&Mask::empty(5, 7), &p).unwrap();
        let img = image::open(&p).unwrap().to_luma8();
        assert_eq!(img.dimensions(), (7, 5));
        assert!(img.pixels().all(|px| px.0[0] == 0));

        let mut m = Mask::empty(5, 7);
        m.set(2, 3, true);
        save_mask(&m, &p).unwrap();
        let back = load_mask(&p).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn unwritable_path() {
        let r = save_float_map(&Plane::filled(2, 2, 0.0), "/nonexistent-dir/x.pfm");
        assert!(matches!(r, Err(Error::Io { .. })));
    }

    proptest! {
        #[test]
        fn pfm_round_trip_is_bit_exact(
            h in 1usize..9,
            w in 1usize..9,
            seed in prop::collection::vec(any::<f32>().prop_filter("finite", |v| v.is_finite()), 81)
        ) {
            let dir = tmp();
            let p = dir.path().join("m.pfm");
            let map = Plane::from_fn(h, w, |r, c| seed[r * 9 + c] as f64);
            save_float_map(&map, &p).unwrap();
            let back = load_image(&p).unwrap();
            prop_assert_eq!(back.channels(), 1);
            for (a, b) in back.channel(0).data().iter().zip(map.data()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
