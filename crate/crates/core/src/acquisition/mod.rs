//! Interleaved-row acquisition: decimation, data fraction and scan time.

mod phantom;

pub use phantom::{
    default_class_specs, generate_phantom, BlobSpec, ClassSpec, PhantomSpec, SpectralPeak,
    DEFAULT_WAVENUMBERS, REFERENCE_WAVENUMBER,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{integer_ratio, spacing_eq, AcquisitionSet, BandImage, HyperCube};

/// Scan geometry for one band: pixel spacing and scanned region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingSpec {
    pub dx_um: f64,
    pub dy_um: f64,
    pub region_width_um: f64,
    pub region_height_um: f64,
}

impl SamplingSpec {
    pub fn new(dx_um: f64, dy_um: f64, region_width_um: f64, region_height_um: f64) -> Result<Self> {
        let spec = Self {
            dx_um,
            dy_um,
            region_width_um,
            region_height_um,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !(positive(self.dx_um)
            && positive(self.dy_um)
            && positive(self.region_width_um)
            && positive(self.region_height_um))
        {
            return Err(Error::InvalidParameter(format!(
                "sampling spacings and region extents must be positive: {self:?}"
            )));
        }
        if self.row_factor().is_none() {
            return Err(Error::InvalidParameter(format!(
                "dy ({}) must be an integer multiple of dx ({})",
                self.dy_um, self.dx_um
            )));
        }
        Ok(())
    }

    /// `dy / dx` as an integer, if it is one.
    pub fn row_factor(&self) -> Option<usize> {
        integer_ratio(self.dy_um / self.dx_um)
    }

    /// Number of scan rows needed to cover the region.
    pub fn rows(&self) -> u64 {
        (self.region_height_um / self.dy_um).ceil() as u64
    }
}

/// Raster-scan time model: a fixed cost per scanned row plus overhead.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TimeModel {
    pub seconds_per_row: f64,
    pub fixed_overhead_s: f64,
}

impl TimeModel {
    /// 1.8 s per row reproduces the 90 minute full-resolution scan of a
    /// 1500 um region at 0.5 um rows.
    pub const SECONDS_PER_ROW: f64 = 1.8;

    pub fn validate(&self) -> Result<()> {
        if !(self.seconds_per_row > 0.0 && self.seconds_per_row.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "seconds_per_row must be positive, got {}",
                self.seconds_per_row
            )));
        }
        if !(self.fixed_overhead_s >= 0.0 && self.fixed_overhead_s.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "fixed_overhead_s must be nonnegative, got {}",
                self.fixed_overhead_s
            )));
        }
        Ok(())
    }
}

impl Default for TimeModel {
    fn default() -> Self {
        Self {
            seconds_per_row: Self::SECONDS_PER_ROW,
            fixed_overhead_s: 0.0,
        }
    }
}

/// Fraction of the full-resolution samples that a protocol acquires.
pub fn data_fraction(spec: &SamplingSpec) -> f64 {
    spec.dx_um / spec.dy_um
}

/// Scan time in minutes for one band.
pub fn acquisition_time(spec: &SamplingSpec, model: &TimeModel) -> f64 {
    (spec.rows() as f64 * model.seconds_per_row + model.fixed_overhead_s) / 60.0
}

/// Keeps rows `0, r, 2r, ...` of a square-pixel band.
pub fn simulate_sparse_acquisition(full: &BandImage, r: usize) -> Result<BandImage> {
    if r < 1 {
        return Err(Error::InvalidParameter("row factor must be at least 1".into()));
    }
    if !spacing_eq(full.dx_um(), full.dy_um()) {
        return Err(Error::InvalidImage(format!(
            "sparse sampling needs square pixels, got {}x{} um",
            full.dx_um(),
            full.dy_um()
        )));
    }
    let rows = full.height().div_ceil(r);
    let mut pixels = Vec::with_capacity(rows * full.width());
    for y in (0..full.height()).step_by(r) {
        pixels.extend_from_slice(full.row(y));
    }
    BandImage::new(
        full.width(),
        rows,
        full.dx_um(),
        r as f64 * full.dx_um(),
        full.wavenumber_cm1(),
        pixels,
    )
}

/// Splits a full-resolution cube into the band at `reference_cm1` (kept at full
/// resolution) and every other band decimated by `r`.
pub fn build_acquisition_set(cube: &HyperCube, reference_cm1: f64, r: usize) -> Result<AcquisitionSet> {
    let ref_idx = cube.find_band(reference_cm1, 0.5).ok_or_else(|| {
        Error::InvalidParameter(format!("reference wavenumber {reference_cm1} not in cube"))
    })?;
    let sparse = cube
        .bands()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != ref_idx)
        .map(|(_, b)| simulate_sparse_acquisition(b, r))
        .collect::<Result<Vec<_>>>()?;
    AcquisitionSet::new(cube.band(ref_idx).clone(), sparse)
}
