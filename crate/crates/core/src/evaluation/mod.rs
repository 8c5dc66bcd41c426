//! Reconstruction-quality metrics, spacing sweeps and ROC analysis.

pub mod plot;
mod roc;
mod sweep;

pub use roc::{auc, roc_curve, RocPoint};
pub use sweep::{spacing_sweep, SweepAggregate, SweepReport, SweepRow};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::BandImage;

/// Mean squared difference over all pixels.
pub fn mse(a: &BandImage, b: &BandImage) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch {
            expected: a.dims(),
            actual: b.dims(),
        });
    }
    let sum: f64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    Ok(sum / a.pixels().len() as f64)
}

/// Intensity range `L` used in the SSIM stabilizers.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "RangeRepr", into = "RangeRepr")]
pub enum DynamicRange {
    /// `max - min` of the first (reference) image.
    #[default]
    Auto,
    Fixed(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RangeRepr {
    Name(String),
    Value(f64),
}

impl TryFrom<RangeRepr> for DynamicRange {
    type Error = String;

    fn try_from(r: RangeRepr) -> std::result::Result<Self, String> {
        match r {
            RangeRepr::Value(v) => Ok(DynamicRange::Fixed(v)),
            RangeRepr::Name(s) if s.eq_ignore_ascii_case("auto") => Ok(DynamicRange::Auto),
            RangeRepr::Name(s) => Err(format!("dynamic_range must be \"auto\" or a number, got {s:?}")),
        }
    }
}

impl From<DynamicRange> for RangeRepr {
    fn from(d: DynamicRange) -> Self {
        match d {
            DynamicRange::Auto => RangeRepr::Name("auto".into()),
            DynamicRange::Fixed(v) => RangeRepr::Value(v),
        }
    }
}

impl fmt::Display for DynamicRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DynamicRange::Auto => f.write_str("auto"),
            DynamicRange::Fixed(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SsimParams {
    /// Side of the square Gaussian window; must be odd.
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: DynamicRange,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            dynamic_range: DynamicRange::Auto,
        }
    }
}

impl SsimParams {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 || self.window.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "SSIM window must be odd, got {}",
                self.window
            )));
        }
        if !(self.sigma > 0.0 && self.k1 > 0.0 && self.k2 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "SSIM sigma, k1 and k2 must be positive: {self:?}"
            )));
        }
        if let DynamicRange::Fixed(l) = self.dynamic_range {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "SSIM dynamic range must be positive, got {l}"
                )));
            }
        }
        Ok(())
    }

    fn kernel(&self) -> Vec<f64> {
        let r = (self.window / 2) as f64;
        let k: Vec<f64> = (0..self.window)
            .map(|i| {
                let d = i as f64 - r;
                (-d * d / (2.0 * self.sigma * self.sigma)).exp()
            })
            .collect();
        let s: f64 = k.iter().sum();
        k.into_iter().map(|v| v / s).collect()
    }
}

/// Separable "valid" correlation of a row-major `w x h` field.
fn filter_valid(data: &[f64], w: usize, h: usize, k: &[f64]) -> Vec<f64> {
    let n = k.len();
    let (ow, oh) = (w - n + 1, h - n + 1);
    let mut tmp = vec![0.0; ow * h];
    for y in 0..h {
        let row = &data[y * w..(y + 1) * w];
        for x in 0..ow {
            tmp[y * ow + x] = k.iter().zip(&row[x..x + n]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = k.iter().enumerate().map(|(i, a)| a * tmp[(y + i) * ow + x]).sum();
        }
    }
    out
}

/// Mean structural similarity over all fully contained windows.
///
/// With [`DynamicRange::Auto`] the range is taken from `a`, so `a` should be
/// the ground truth; the metric is symmetric only for a fixed range. A
/// constant reference has zero range and falls back to `L = 1`.
pub fn ssim(a: &BandImage, b: &BandImage, p: &SsimParams) -> Result<f64> {
    p.validate()?;
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch {
            expected: a.dims(),
            actual: b.dims(),
        });
    }
    let (w, h) = a.dims();
    if w < p.window || h < p.window {
        return Err(Error::TooSmall {
            width: w,
            height: h,
            min: p.window,
        });
    }
    let l = match p.dynamic_range {
        DynamicRange::Fixed(l) => l,
        DynamicRange::Auto => {
            let (lo, hi) = a.min_max();
            let range = hi as f64 - lo as f64;
            if range > 0.0 {
                range
            } else {
                1.0
            }
        }
    };
    let c1 = (p.k1 * l).powi(2);
    let c2 = (p.k2 * l).powi(2);

    let x: Vec<f64> = a.pixels().iter().map(|&v| v as f64).collect();
    let y: Vec<f64> = b.pixels().iter().map(|&v| v as f64).collect();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(u, v)| u * v).collect();
    let k = p.kernel();
    let mx = filter_valid(&x, w, h, &k);
    let my = filter_valid(&y, w, h, &k);
    let sxx = filter_valid(&xx, w, h, &k);
    let syy = filter_valid(&yy, w, h, &k);
    let sxy = filter_valid(&xy, w, h, &k);

    let total: f64 = (0..mx.len())
        .map(|i| {
            let (ma, mb) = (mx[i], my[i]);
            let va = sxx[i] - ma * ma;
            let vb = syy[i] - mb * mb;
            let cov = sxy[i] - ma * mb;
            let num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
            let den = (ma * ma + mb * mb + c1) * (va + vb + c2);
            (num / den).clamp(-1.0, 1.0)
        })
        .sum();
    Ok(total / mx.len() as f64)
}
