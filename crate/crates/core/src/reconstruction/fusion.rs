use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curvelet::CurveletTransform;
use super::interpolate::{upsample_to_height, DEFAULT_SIGMA_FRAC};
use crate::error::{Error, Result};
use crate::image::{AcquisitionSet, BandImage, HyperCube};

/// Scale at which fusion switches from the interpolated band to the reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "CutoffRepr", into = "CutoffRepr")]
pub enum Cutoff {
    /// `J - 1 - ceil(log2 r)`, clamped to the valid scale range.
    #[default]
    Auto,
    /// Last scale taken from the interpolated band.
    Scale(usize),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CutoffRepr {
    Name(String),
    Index(usize),
}

impl TryFrom<CutoffRepr> for Cutoff {
    type Error = String;

    fn try_from(r: CutoffRepr) -> std::result::Result<Self, String> {
        match r {
            CutoffRepr::Index(j) => Ok(Cutoff::Scale(j)),
            CutoffRepr::Name(s) => s.parse(),
        }
    }
}

impl From<Cutoff> for CutoffRepr {
    fn from(c: Cutoff) -> Self {
        match c {
            Cutoff::Auto => CutoffRepr::Name("auto".into()),
            Cutoff::Scale(j) => CutoffRepr::Index(j),
        }
    }
}

impl FromStr for Cutoff {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            Ok(Cutoff::Auto)
        } else {
            s.parse()
                .map(Cutoff::Scale)
                .map_err(|_| format!("cutoff must be \"auto\" or a scale index, got {s:?}"))
        }
    }
}

impl fmt::Display for Cutoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cutoff::Auto => f.write_str("auto"),
            Cutoff::Scale(j) => write!(f, "{j}"),
        }
    }
}

impl Cutoff {
    /// Concrete cutoff scale for a pyramid of `nscales` and decimation `r`.
    pub fn resolve(self, nscales: usize, r: usize) -> Result<usize> {
        match self {
            Cutoff::Auto => {
                let log2_r = (usize::BITS - r.max(1).saturating_sub(1).leading_zeros()) as usize;
                Ok((nscales - 1).saturating_sub(log2_r))
            }
            Cutoff::Scale(j) if j < nscales => Ok(j),
            Cutoff::Scale(j) => Err(Error::InvalidParameter(format!(
                "cutoff scale {j} outside 0..{nscales}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FusionConfig {
    pub cutoff_scale: Cutoff,
    pub gaussian_sigma_frac: f64,
    pub equalization: bool,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            cutoff_scale: Cutoff::Auto,
            gaussian_sigma_frac: DEFAULT_SIGMA_FRAC,
            equalization: true,
        }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gaussian_sigma_frac > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gaussian_sigma_frac must be positive, got {}",
                self.gaussian_sigma_frac
            )));
        }
        Ok(())
    }
}

/// Result of [`equalize_linear`].
#[derive(Debug, Clone, PartialEq)]
pub struct Equalized {
    pub image: BandImage,
    pub gain: f64,
    pub offset: f64,
    /// The reference was constant, so the gain was forced to zero.
    pub degenerate: bool,
}

/// Least-squares affine map of `reference` onto `target`.
///
/// The output carries the target's metadata, so the mapped reference can
/// stand in for the target band.
pub fn equalize_linear(reference: &BandImage, target: &BandImage) -> Result<Equalized> {
    if reference.dims() != target.dims() {
        return Err(Error::DimensionMismatch {
            expected: target.dims(),
            actual: reference.dims(),
        });
    }
    let mean_r = reference.mean();
    let mean_t = target.mean();
    let (mut cov, mut var) = (0.0, 0.0);
    for (&r, &t) in reference.pixels().iter().zip(target.pixels()) {
        let dr = r as f64 - mean_r;
        cov += dr * (t as f64 - mean_t);
        var += dr * dr;
    }
    let degenerate = var == 0.0;
    let gain = if degenerate { 0.0 } else { cov / var };
    let offset = mean_t - gain * mean_r;
    let pixels = reference
        .pixels()
        .iter()
        .map(|&r| (gain * r as f64 + offset) as f32)
        .collect();
    Ok(Equalized {
        image: target.with_pixels(pixels)?,
        gain,
        offset,
        degenerate,
    })
}

/// Replaces the fine curvelet scales of `interp` with those of the (equalized)
/// high-resolution `reference`.
pub fn fuse_bands(interp: &BandImage, reference: &BandImage, r: usize, cfg: &FusionConfig) -> Result<BandImage> {
    let t = CurveletTransform::new(interp.width(), interp.height())?;
    fuse_with(&t, interp, reference, r, cfg)
}

/// [`fuse_bands`] with a prebuilt transform of matching size.
pub fn fuse_with(
    transform: &CurveletTransform,
    interp: &BandImage,
    reference: &BandImage,
    r: usize,
    cfg: &FusionConfig,
) -> Result<BandImage> {
    if interp.dims() != reference.dims() {
        return Err(Error::DimensionMismatch {
            expected: interp.dims(),
            actual: reference.dims(),
        });
    }
    let nscales = transform.nscales();
    let cutoff = cfg.cutoff_scale.resolve(nscales, r)?;
    if cutoff + 1 >= nscales {
        return Ok(interp.clone());
    }
    let detail = if cfg.equalization {
        equalize_linear(reference, interp)?.image
    } else {
        interp.with_pixels(reference.pixels().to_vec())?
    };
    let mut coeffs = transform.forward(interp)?;
    let detail = transform.forward(&detail)?;
    coeffs.splice_fine_scales(&detail, cutoff + 1)?;
    transform.inverse(&coeffs)
}

/// Interpolated and fused versions of one sparse band.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructedBand {
    pub interpolated: BandImage,
    pub fused: BandImage,
}

/// Interpolates one row-decimated band onto the reference grid and fuses it.
pub fn reconstruct_band(
    transform: &CurveletTransform,
    sparse: &BandImage,
    reference: &BandImage,
    cfg: &FusionConfig,
) -> Result<ReconstructedBand> {
    let interpolated = upsample_to_height(sparse, reference.height(), cfg.gaussian_sigma_frac)?;
    let r = (sparse.dy_um() / sparse.dx_um()).round() as usize;
    let fused = fuse_with(transform, &interpolated, reference, r, cfg)?;
    Ok(ReconstructedBand {
        interpolated,
        fused,
    })
}

/// Reconstructs every sparse band of `set` and returns them together with the
/// reference as one full-resolution cube ordered by wavenumber.
pub fn reconstruct_set(set: &AcquisitionSet, cfg: &FusionConfig) -> Result<HyperCube> {
    Ok(reconstruct_set_detailed(set, cfg)?.0)
}

/// [`reconstruct_set`] that also returns the interpolation-only bands, in the
/// order of `set.sparse_bands()`.
pub fn reconstruct_set_detailed(set: &AcquisitionSet, cfg: &FusionConfig) -> Result<(HyperCube, Vec<BandImage>)> {
    cfg.validate()?;
    let reference = set.reference();
    let transform = CurveletTransform::new(reference.width(), reference.height())?;
    let bands = set
        .sparse_bands()
        .par_iter()
        .map(|b| reconstruct_band(&transform, b, reference, cfg))
        .collect::<Result<Vec<_>>>()?;
    let (interpolated, mut fused): (Vec<_>, Vec<_>) =
        bands.into_iter().map(|b| (b.interpolated, b.fused)).unzip();
    fused.push(reference.clone());
    Ok((HyperCube::from_unsorted(fused)?, interpolated))
}
