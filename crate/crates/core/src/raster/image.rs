use std::path::Path;

use image::{DynamicImage, GrayImage, ImageFormat, Rgb, RgbImage};

use crate::error::{Error, Result};
use crate::io::write_atomic;

/// Row-major grayscale image, 0 = black, 1 = white.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    pixels: Vec<f32>,
}

impl RasterImage {
    pub fn filled(width: usize, height: usize, value: f32) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        assert!((0.0..=1.0).contains(&value));
        RasterImage {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn white(width: usize, height: usize) -> Self {
        Self::filled(width, height, 1.0)
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!("zero dimension {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        if let Some(bad) = pixels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidImage(format!("intensity {bad} outside [0, 1]")));
        }
        Ok(RasterImage {
            width,
            height,
            pixels,
        })
    }

    /// Caller guarantees the invariants; used by in-crate renderers.
    pub(crate) fn from_raw(width: usize, height: usize, pixels: Vec<f32>) -> Self {
        debug_assert_eq!(pixels.len(), width * height);
        debug_assert!(pixels.iter().all(|v| (0.0..=1.0).contains(v)));
        RasterImage {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.pixels[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[f32] {
        &self.pixels[y * self.width..(y + 1) * self.width]
    }

    /// Σ(1 − v): total ink.
    pub fn darkness(&self) -> f64 {
        self.pixels.iter().map(|&v| 1.0 - v as f64).sum()
    }

    pub fn is_binary(&self) -> bool {
        self.pixels.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub fn is_blank(&self) -> bool {
        self.pixels.iter().all(|&v| v == 1.0)
    }

    pub fn count_black(&self) -> usize {
        self.pixels.iter().filter(|&&v| v == 0.0).count()
    }

    /// 8-bit quantization used for PNG output.
    pub fn to_luma8(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect()
    }

    pub fn from_luma8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        let pixels = bytes.iter().map(|&b| b as f32 / 255.0).collect();
        Self::from_pixels(width, height, pixels)
    }

    pub fn encode_png(&self) -> Vec<u8> {
        let img = GrayImage::from_raw(self.width as u32, self.height as u32, self.to_luma8())
            .expect("buffer matches dimensions");
        let mut out = std::io::Cursor::new(Vec::new());
        img.write_to(&mut out, ImageFormat::Png)
            .expect("in-memory PNG encoding");
        out.into_inner()
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.encode_png())
    }

    /// Reads an 8-bit grayscale PNG. Any other color type is a format error.
    pub fn load_png(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let img = image::load_from_memory_with_format(&bytes, ImageFormat::Png).map_err(|e| {
            Error::Image {
                path: path.to_path_buf(),
                source: e,
            }
        })?;
        match img {
            DynamicImage::ImageLuma8(g) => {
                let (w, h) = g.dimensions();
                Self::from_luma8(w as usize, h as usize, g.as_raw())
            }
            other => Err(Error::Format {
                path: path.to_path_buf(),
                reason: format!("expected 8-bit grayscale PNG, found {:?}", other.color()),
            }),
        }
    }
}

/// Overlay in the style of a fitting snapshot: `base` ink in black, `overlay`
/// ink in blue, everything else white.
pub fn overlay_png(base: &RasterImage, overlay: &RasterImage, path: &Path) -> Result<()> {
    if base.dims() != overlay.dims() {
        return Err(Error::DimensionMismatch {
            left: base.dims(),
            right: overlay.dims(),
        });
    }
    let mut img = RgbImage::new(base.width as u32, base.height as u32);
    for (i, px) in img.pixels_mut().enumerate() {
        let b = base.pixels[i];
        let o = 1.0 - overlay.pixels[i];
        // Start from the base gray, then pull red/green down where the overlay has ink.
        let g = (b * 255.0).round();
        let rg = (g * (1.0 - o)).round() as u8;
        *px = Rgb([rg, rg, g.max(o * 255.0).round() as u8]);
    }
    let mut out = std::io::Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| Error::Image {
            path: path.to_path_buf(),
            source: e,
        })?;
    write_atomic(path, &out.into_inner())
}

/// Source-pixel weights for one output pixel of an area-averaging resample.
#[derive(Debug, Clone)]
pub(crate) struct Footprint {
    pub start: usize,
    pub weights: Vec<f64>,
}

/// For each of `target` output pixels, the overlap of its source interval
/// `[i*src/target, (i+1)*src/target)` with each source pixel, normalized to
/// sum to one.
pub(crate) fn area_footprints(src: usize, target: usize) -> Vec<Footprint> {
    let scale = src as f64 / target as f64;
    (0..target)
        .map(|i| {
            let lo = i as f64 * scale;
            let hi = (i + 1) as f64 * scale;
            let first = lo.floor() as usize;
            let last = (hi.ceil() as usize).min(src);
            let weights = (first..last)
                .map(|k| {
                    let a = lo.max(k as f64);
                    let b = hi.min((k + 1) as f64);
                    ((b - a).max(0.0)) / scale
                })
                .collect();
            Footprint {
                start: first,
                weights,
            }
        })
        .collect()
}

/// Pads `img` with white on the right/bottom to a square, then area-averages
/// it down (or up) to `target × target`.
pub fn resize(img: &RasterImage, target: usize) -> RasterImage {
    assert!(target > 0);
    let side = img.width.max(img.height);
    if side == target && img.width == img.height {
        return img.clone();
    }
    let fp = area_footprints(side, target);

    // Horizontal pass over the real rows; padded columns read as white.
    let mut horiz = vec![0f64; img.height * target];
    for y in 0..img.height {
        let row = img.row(y);
        for (i, f) in fp.iter().enumerate() {
            let mut acc = 0.0;
            for (k, &w) in f.weights.iter().enumerate() {
                let x = f.start + k;
                let v = if x < img.width { row[x] as f64 } else { 1.0 };
                acc += w * v;
            }
            horiz[y * target + i] = acc;
        }
    }

    let mut out = vec![0f32; target * target];
    for (j, f) in fp.iter().enumerate() {
        for i in 0..target {
            let mut acc = 0.0;
            for (k, &w) in f.weights.iter().enumerate() {
                let y = f.start + k;
                let v = if y < img.height {
                    horiz[y * target + i]
                } else {
                    1.0
                };
                acc += w * v;
            }
            out[j * target + i] = acc.clamp(0.0, 1.0) as f32;
        }
    }
    RasterImage::from_raw(target, target, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_stays_white() {
        let r = resize(&RasterImage::white(595, 842), 256);
        assert_eq!(r.dims(), (256, 256));
        assert!(r.pixels().iter().all(|&v| (v - 1.0).abs() < 1e-6));
    }

    #[test]
    fn aligned_block_halves_exactly() {
        let mut px = vec![1.0f32; 512 * 512];
        for y in 256..258 {
            for x in 256..258 {
                px[y * 512 + x] = 0.0;
            }
        }
        let img = RasterImage::from_pixels(512, 512, px).unwrap();
        let r = resize(&img, 256);
        assert_eq!(r.get(128, 128), 0.0);
        let dark: Vec<_> = r.pixels().iter().filter(|&&v| v < 1.0).collect();
        assert_eq!(dark.len(), 1);
    }

    #[test]
    fn footprints_sum_to_one() {
        for (src, t) in [(842, 256), (512, 256), (300, 256), (100, 256)] {
            for f in area_footprints(src, t) {
                let s: f64 = f.weights.iter().sum();
                assert!((s - 1.0).abs() < 1e-9, "{src}->{t}: {s}");
            }
        }
    }

    #[test]
    fn png_round_trip_is_exact_on_quantized_values() {
        let px: Vec<f32> = (0..64).map(|i| (i * 4) as f32 / 255.0).collect();
        let img = RasterImage::from_pixels(8, 8, px).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.png");
        img.save_png(&p).unwrap();
        assert_eq!(RasterImage::load_png(&p).unwrap(), img);
    }

    #[test]
    fn rgb_png_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rgb.png");
        RgbImage::new(4, 4).save(&p).unwrap();
        assert!(matches!(
            RasterImage::load_png(&p),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn rejects_out_of_range_pixels() {
        assert!(RasterImage::from_pixels(1, 1, vec![1.5]).is_err());
        assert!(RasterImage::from_pixels(2, 1, vec![1.0]).is_err());
    }
}
