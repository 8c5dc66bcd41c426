//! Rasters, hyperspectral cubes and label maps.
//!
//! Every type here validates its invariants at construction and is immutable
//! afterwards, so values can be shared freely between worker threads.

mod export;
mod io;

pub use export::{export_label_png, export_png, export_triptych_png, CLASS_PALETTE};
pub use io::{load_cube, load_label_map, save_cube, save_label_map};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when comparing physical pixel spacings.
pub(crate) const SPACING_RTOL: f64 = 1e-9;

pub(crate) fn spacing_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= SPACING_RTOL * a.abs().max(b.abs())
}

/// Returns `Some(r)` when `ratio` is within tolerance of a positive integer.
pub(crate) fn integer_ratio(ratio: f64) -> Option<usize> {
    let r = ratio.round();
    if r >= 1.0 && (ratio - r).abs() <= SPACING_RTOL * r {
        Some(r as usize)
    } else {
        None
    }
}

/// A single-wavenumber raster with physical pixel spacing.
///
/// Pixels are stored row-major; row `y` spans `pixels[y*width..(y+1)*width]`.
/// The vertical (slow scan) axis is `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandImage {
    width: usize,
    height: usize,
    dx_um: f64,
    dy_um: f64,
    wavenumber_cm1: f64,
    pixels: Vec<f32>,
}

impl BandImage {
    pub fn new(
        width: usize,
        height: usize,
        dx_um: f64,
        dy_um: f64,
        wavenumber_cm1: f64,
        pixels: Vec<f32>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{} pixels supplied for a {width}x{height} raster",
                pixels.len()
            )));
        }
        if !(dx_um > 0.0 && dx_um.is_finite() && dy_um > 0.0 && dy_um.is_finite()) {
            return Err(Error::InvalidImage(format!(
                "pixel spacing must be positive, got dx={dx_um} dy={dy_um}"
            )));
        }
        if !(wavenumber_cm1 > 0.0 && wavenumber_cm1.is_finite()) {
            return Err(Error::InvalidImage(format!(
                "wavenumber must be positive, got {wavenumber_cm1}"
            )));
        }
        if let Some(index) = pixels.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { band: 0, index });
        }
        Ok(Self {
            width,
            height,
            dx_um,
            dy_um,
            wavenumber_cm1,
            pixels,
        })
    }

    /// Builds a band with square `spacing_um` pixels by evaluating `f(x, y)`.
    pub fn from_fn(
        width: usize,
        height: usize,
        spacing_um: f64,
        wavenumber_cm1: f64,
        mut f: impl FnMut(usize, usize) -> f32,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, spacing_um, spacing_um, wavenumber_cm1, pixels)
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

    pub fn dx_um(&self) -> f64 {
        self.dx_um
    }

    pub fn dy_um(&self) -> f64 {
        self.dy_um
    }

    pub fn wavenumber_cm1(&self) -> f64 {
        self.wavenumber_cm1
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f32> {
        self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.pixels[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[f32] {
        &self.pixels[y * self.width..(y + 1) * self.width]
    }

    /// Same metadata, new pixel values.
    pub fn with_pixels(&self, pixels: Vec<f32>) -> Result<Self> {
        Self::new(
            self.width,
            self.height,
            self.dx_um,
            self.dy_um,
            self.wavenumber_cm1,
            pixels,
        )
    }

    pub fn with_wavenumber(mut self, wavenumber_cm1: f64) -> Result<Self> {
        if !(wavenumber_cm1 > 0.0 && wavenumber_cm1.is_finite()) {
            return Err(Error::InvalidImage(format!(
                "wavenumber must be positive, got {wavenumber_cm1}"
            )));
        }
        self.wavenumber_cm1 = wavenumber_cm1;
        Ok(self)
    }

    /// `(min, max)` over all pixels.
    pub fn min_max(&self) -> (f32, f32) {
        self.pixels
            .iter()
            .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn mean(&self) -> f64 {
        self.pixels.iter().map(|&v| v as f64).sum::<f64>() / self.pixels.len() as f64
    }

    pub(crate) fn same_geometry(&self, other: &BandImage) -> bool {
        self.width == other.width
            && self.height == other.height
            && spacing_eq(self.dx_um, other.dx_um)
            && spacing_eq(self.dy_um, other.dy_um)
    }
}

/// Extracts the `w`x`h` window whose top-left corner is `(x0, y0)`.
pub fn crop(band: &BandImage, x0: usize, y0: usize, w: usize, h: usize) -> Result<BandImage> {
    let fits = w > 0
        && h > 0
        && x0.checked_add(w).is_some_and(|e| e <= band.width)
        && y0.checked_add(h).is_some_and(|e| e <= band.height);
    if !fits {
        return Err(Error::OutOfBounds(format!(
            "{w}x{h} window at ({x0}, {y0}) does not fit a {}x{} band",
            band.width, band.height
        )));
    }
    let mut pixels = Vec::with_capacity(w * h);
    for y in y0..y0 + h {
        pixels.extend_from_slice(&band.row(y)[x0..x0 + w]);
    }
    BandImage::new(w, h, band.dx_um, band.dy_um, band.wavenumber_cm1, pixels)
}

/// An ordered stack of co-registered bands.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperCube {
    bands: Vec<BandImage>,
}

impl HyperCube {
    /// Requires at least one band, identical geometry across bands and
    /// strictly increasing wavenumbers.
    pub fn new(bands: Vec<BandImage>) -> Result<Self> {
        let Some(first) = bands.first() else {
            return Err(Error::InvalidImage("a cube needs at least one band".into()));
        };
        for (i, band) in bands.iter().enumerate().skip(1) {
            if !band.same_geometry(first) {
                return Err(Error::InvalidImage(format!(
                    "band {i} geometry differs from band 0"
                )));
            }
            if band.wavenumber_cm1 <= bands[i - 1].wavenumber_cm1 {
                return Err(Error::InvalidImage(format!(
                    "wavenumbers must be strictly increasing (band {i}: {} after {})",
                    band.wavenumber_cm1,
                    bands[i - 1].wavenumber_cm1
                )));
            }
        }
        Ok(Self { bands })
    }

    /// Like [`HyperCube::new`] but sorts the bands by wavenumber first.
    pub fn from_unsorted(mut bands: Vec<BandImage>) -> Result<Self> {
        bands.sort_by(|a, b| a.wavenumber_cm1.total_cmp(&b.wavenumber_cm1));
        Self::new(bands)
    }

    pub fn bands(&self) -> &[BandImage] {
        &self.bands
    }

    pub fn into_bands(self) -> Vec<BandImage> {
        self.bands
    }

    pub fn band(&self, index: usize) -> &BandImage {
        &self.bands[index]
    }

    pub fn len(&self) -> usize {
        self.bands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }

    pub fn width(&self) -> usize {
        self.bands[0].width
    }

    pub fn height(&self) -> usize {
        self.bands[0].height
    }

    pub fn dx_um(&self) -> f64 {
        self.bands[0].dx_um
    }

    pub fn dy_um(&self) -> f64 {
        self.bands[0].dy_um
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        self.bands.iter().map(|b| b.wavenumber_cm1).collect()
    }

    /// Finds the band closest to `wavenumber_cm1` within `tol` cm⁻¹.
    pub fn find_band(&self, wavenumber_cm1: f64, tol: f64) -> Option<usize> {
        self.bands
            .iter()
            .enumerate()
            .map(|(i, b)| (i, (b.wavenumber_cm1 - wavenumber_cm1).abs()))
            .filter(|&(_, d)| d <= tol)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }

    /// The spectrum at pixel `(x, y)`, one value per band.
    pub fn spectrum(&self, x: usize, y: usize) -> Vec<f32> {
        let idx = y * self.width() + x;
        self.bands.iter().map(|b| b.pixels[idx]).collect()
    }
}

/// One full-resolution reference band plus row-decimated bands.
#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionSet {
    reference: BandImage,
    sparse_bands: Vec<BandImage>,
}

impl AcquisitionSet {
    pub fn new(reference: BandImage, sparse_bands: Vec<BandImage>) -> Result<Self> {
        if !spacing_eq(reference.dx_um, reference.dy_um) {
            return Err(Error::InvalidImage(format!(
                "reference pixels must be square, got {}x{} um",
                reference.dx_um, reference.dy_um
            )));
        }
        for (i, band) in sparse_bands.iter().enumerate() {
            if band.width != reference.width || !spacing_eq(band.dx_um, reference.dx_um) {
                return Err(Error::InvalidImage(format!(
                    "sparse band {i} does not share the reference x sampling"
                )));
            }
            let r = integer_ratio(band.dy_um / band.dx_um).ok_or_else(|| {
                Error::InvalidImage(format!(
                    "sparse band {i}: dy/dx = {} is not a positive integer",
                    band.dy_um / band.dx_um
                ))
            })?;
            let expected = reference.height.div_ceil(r);
            if band.height != expected {
                return Err(Error::InvalidImage(format!(
                    "sparse band {i}: height {} but ceil({}/{r}) = {expected}",
                    band.height, reference.height
                )));
            }
        }
        Ok(Self {
            reference,
            sparse_bands,
        })
    }

    pub fn reference(&self) -> &BandImage {
        &self.reference
    }

    pub fn sparse_bands(&self) -> &[BandImage] {
        &self.sparse_bands
    }

    /// Row decimation factor of sparse band `index`.
    pub fn factor(&self, index: usize) -> usize {
        let b = &self.sparse_bands[index];
        integer_ratio(b.dy_um / b.dx_um).expect("validated at construction")
    }
}

/// Tissue classes carried by label maps. Code 0 is unlabeled background.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TissueClass {
    Epithelium = 1,
    Stroma = 2,
    Necrosis = 3,
}

impl TissueClass {
    pub const ALL: [TissueClass; 3] = [
        TissueClass::Epithelium,
        TissueClass::Stroma,
        TissueClass::Necrosis,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(TissueClass::Epithelium),
            2 => Some(TissueClass::Stroma),
            3 => Some(TissueClass::Necrosis),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TissueClass::Epithelium => "epithelium",
            TissueClass::Stroma => "stroma",
            TissueClass::Necrosis => "necrosis",
        }
    }
}

/// Per-pixel class codes: 0 unlabeled, 1 epithelium, 2 stroma, 3 necrosis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u8>,
}

impl LabelMap {
    pub fn new(width: usize, height: usize, labels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || labels.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{} labels supplied for a {width}x{height} map",
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&c| c > 3) {
            return Err(Error::InvalidImage(format!("label code {bad} out of range")));
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.labels[y * self.width + x]
    }

    /// Number of pixels carrying each code 0..=3.
    pub fn histogram(&self) -> [usize; 4] {
        let mut h = [0usize; 4];
        for &c in &self.labels {
            h[c as usize] += 1;
        }
        h
    }

    /// Classes with at least one pixel, in code order.
    pub fn present_classes(&self) -> Vec<TissueClass> {
        let h = self.histogram();
        TissueClass::ALL
            .into_iter()
            .filter(|c| h[c.code() as usize] > 0)
            .collect()
    }
}
