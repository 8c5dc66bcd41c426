use std::path::Path;

use image::{GrayImage, ImageFormat, Luma, Rgb, RgbImage};

use super::{BandImage, LabelMap};
use crate::error::{Error, Result};

/// RGB colour per label code: background black, epithelium red, stroma green,
/// necrosis blue.
pub const CLASS_PALETTE: [[u8; 3]; 4] = [[0, 0, 0], [255, 0, 0], [0, 255, 0], [0, 0, 255]];

const TRIPTYCH_GAP: u32 = 4;

fn to_gray(v: f32, lo: f32, hi: f32) -> u8 {
    if hi <= lo {
        return 128;
    }
    let t = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
    (t * 255.0).round() as u8
}

fn save(img: impl FnOnce(&Path) -> image::ImageResult<()>, path: &Path) -> Result<()> {
    img(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Encode(other.to_string()),
    })
}

/// Writes `band` as an 8-bit grayscale PNG, mapping `range` (default: the
/// band's own min/max) linearly onto 0..=255. A degenerate range produces a
/// uniform mid-gray image.
pub fn export_png(band: &BandImage, path: impl AsRef<Path>, range: Option<(f32, f32)>) -> Result<()> {
    let (lo, hi) = range.unwrap_or_else(|| band.min_max());
    let raw = band.pixels().iter().map(|&v| to_gray(v, lo, hi)).collect();
    let img = GrayImage::from_raw(band.width() as u32, band.height() as u32, raw)
        .expect("buffer length matches dimensions");
    save(|p| img.save_with_format(p, ImageFormat::Png), path.as_ref())
}

/// Places equally sized bands side by side on a shared intensity scale.
pub fn export_triptych_png(panels: &[&BandImage], path: impl AsRef<Path>) -> Result<()> {
    let Some(first) = panels.first() else {
        return Err(Error::InvalidParameter("no panels to export".into()));
    };
    let (w, h) = first.dims();
    if let Some(p) = panels.iter().find(|p| p.dims() != (w, h)) {
        return Err(Error::DimensionMismatch {
            expected: (w, h),
            actual: p.dims(),
        });
    }
    let (lo, hi) = panels.iter().map(|p| p.min_max()).fold(
        (f32::INFINITY, f32::NEG_INFINITY),
        |(lo, hi), (a, b)| (lo.min(a), hi.max(b)),
    );
    let n = panels.len() as u32;
    let total_w = n * w as u32 + (n - 1) * TRIPTYCH_GAP;
    let mut img = GrayImage::from_pixel(total_w, h as u32, Luma([255]));
    for (i, panel) in panels.iter().enumerate() {
        let x_off = i as u32 * (w as u32 + TRIPTYCH_GAP);
        for y in 0..h {
            for (x, &v) in panel.row(y).iter().enumerate() {
                img.put_pixel(x_off + x as u32, y as u32, Luma([to_gray(v, lo, hi)]));
            }
        }
    }
    save(|p| img.save_with_format(p, ImageFormat::Png), path.as_ref())
}

/// Writes a label map as an RGB composite using [`CLASS_PALETTE`].
pub fn export_label_png(map: &LabelMap, path: impl AsRef<Path>) -> Result<()> {
    let mut img = RgbImage::new(map.width() as u32, map.height() as u32);
    for (i, &code) in map.labels().iter().enumerate() {
        let x = (i % map.width()) as u32;
        let y = (i / map.width()) as u32;
        img.put_pixel(x, y, Rgb(CLASS_PALETTE[code as usize]));
    }
    save(|p| img.save_with_format(p, ImageFormat::Png), path.as_ref())
}
