//! Band-sequential raw rasters with a JSON sidecar header.
//!
//! `<name>.json` holds the header, `<name>.raw` the samples: little-endian
//! f32 (cubes) or u8 (label maps), band after band, row-major within a band.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{BandImage, HyperCube, LabelMap};
use crate::error::{Error, Result};

const DTYPE_F32: &str = "f32le";
const DTYPE_U8: &str = "u8";
const INTERLEAVE_BSQ: &str = "bsq";

#[derive(Debug, Serialize, Deserialize)]
struct RasterHeader {
    width: usize,
    height: usize,
    bands: usize,
    dtype: String,
    interleave: String,
    pixel_dx_um: f64,
    pixel_dy_um: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    wavenumbers_cm1: Option<Vec<f64>>,
}

/// Header and raster paths for a dataset path with or without extension.
fn sidecar_paths(path: &Path) -> (PathBuf, PathBuf) {
    (path.with_extension("json"), path.with_extension("raw"))
}

fn read_header(path: &Path) -> Result<RasterHeader> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Header {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn write_header(path: &Path, header: &RasterHeader) -> Result<()> {
    let mut text = serde_json::to_string_pretty(header)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_raster(path: &Path, expected_bytes: u64) -> Result<Vec<u8>> {
    let meta = fs::metadata(path).map_err(|e| Error::io(path, e))?;
    if meta.len() != expected_bytes {
        return Err(Error::SizeMismatch {
            expected: expected_bytes,
            actual: meta.len(),
        });
    }
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn check_layout(header: &RasterHeader, dtype: &'static str, path: &Path) -> Result<()> {
    if header.dtype != dtype {
        return Err(Error::Unsupported {
            field: "dtype",
            value: header.dtype.clone(),
        });
    }
    if header.interleave != INTERLEAVE_BSQ {
        return Err(Error::Unsupported {
            field: "interleave",
            value: header.interleave.clone(),
        });
    }
    if header.width == 0 || header.height == 0 || header.bands == 0 {
        return Err(Error::Header {
            path: path.to_path_buf(),
            message: "width, height and bands must be positive".into(),
        });
    }
    Ok(())
}

/// Reads a cube written by [`save_cube`] (or any producer of the same format).
pub fn load_cube(path: impl AsRef<Path>) -> Result<HyperCube> {
    let (header_path, raw_path) = sidecar_paths(path.as_ref());
    let header = read_header(&header_path)?;
    check_layout(&header, DTYPE_F32, &header_path)?;
    let wavenumbers = header.wavenumbers_cm1.as_deref().unwrap_or(&[]);
    if wavenumbers.len() != header.bands {
        return Err(Error::Header {
            path: header_path,
            message: format!(
                "{} wavenumbers listed for {} bands",
                wavenumbers.len(),
                header.bands
            ),
        });
    }

    let plane = header.width * header.height;
    let expected = (plane * header.bands * 4) as u64;
    let bytes = read_raster(&raw_path, expected)?;

    let mut bands = Vec::with_capacity(header.bands);
    for (b, chunk) in bytes.chunks_exact(plane * 4).enumerate() {
        let pixels: Vec<f32> = chunk
            .chunks_exact(4)
            .map(|q| f32::from_le_bytes([q[0], q[1], q[2], q[3]]))
            .collect();
        if let Some(index) = pixels.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { band: b, index });
        }
        bands.push(BandImage::new(
            header.width,
            header.height,
            header.pixel_dx_um,
            header.pixel_dy_um,
            wavenumbers[b],
            pixels,
        )?);
    }
    HyperCube::new(bands)
}

/// Writes `cube` as `<path>.json` + `<path>.raw`.
pub fn save_cube(cube: &HyperCube, path: impl AsRef<Path>) -> Result<()> {
    let (header_path, raw_path) = sidecar_paths(path.as_ref());
    let header = RasterHeader {
        width: cube.width(),
        height: cube.height(),
        bands: cube.len(),
        dtype: DTYPE_F32.into(),
        interleave: INTERLEAVE_BSQ.into(),
        pixel_dx_um: cube.dx_um(),
        pixel_dy_um: cube.dy_um(),
        wavenumbers_cm1: Some(cube.wavenumbers()),
    };
    let mut bytes = Vec::with_capacity(cube.width() * cube.height() * cube.len() * 4);
    for band in cube.bands() {
        for v in band.pixels() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    write_header(&header_path, &header)?;
    fs::write(&raw_path, bytes).map_err(|e| Error::io(&raw_path, e))
}

/// Reads a single-band u8 label map.
pub fn load_label_map(path: impl AsRef<Path>) -> Result<LabelMap> {
    let (header_path, raw_path) = sidecar_paths(path.as_ref());
    let header = read_header(&header_path)?;
    check_layout(&header, DTYPE_U8, &header_path)?;
    if header.bands != 1 {
        return Err(Error::Header {
            path: header_path,
            message: format!("label maps hold one band, header declares {}", header.bands),
        });
    }
    let bytes = read_raster(&raw_path, (header.width * header.height) as u64)?;
    LabelMap::new(header.width, header.height, bytes)
}

/// Writes a label map; the spacing is recorded in the header for provenance.
pub fn save_label_map(
    map: &LabelMap,
    dx_um: f64,
    dy_um: f64,
    path: impl AsRef<Path>,
) -> Result<()> {
    let (header_path, raw_path) = sidecar_paths(path.as_ref());
    let header = RasterHeader {
        width: map.width(),
        height: map.height(),
        bands: 1,
        dtype: DTYPE_U8.into(),
        interleave: INTERLEAVE_BSQ.into(),
        pixel_dx_um: dx_um,
        pixel_dy_um: dy_um,
        wavenumbers_cm1: None,
    };
    write_header(&header_path, &header)?;
    fs::write(&raw_path, map.labels()).map_err(|e| Error::io(&raw_path, e))
}
