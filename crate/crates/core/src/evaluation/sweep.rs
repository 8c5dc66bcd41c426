use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{mse, ssim, SsimParams};
use crate::acquisition::build_acquisition_set;
use crate::error::{Error, Result};
use crate::image::HyperCube;
use crate::reconstruction::{reconstruct_set, FusionConfig};

/// Score of one reconstructed band at one decimation factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub r: usize,
    pub dy_um: f64,
    pub wavenumber_cm1: f64,
    pub mse: f64,
    pub ssim: f64,
}

/// Mean and population standard deviation over the bands of one factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepAggregate {
    pub r: usize,
    pub dy_um: f64,
    pub n_bands: usize,
    pub mse_mean: f64,
    pub mse_std: f64,
    pub ssim_mean: f64,
    pub ssim_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub reference_wavenumber_cm1: f64,
    pub ssim_params: SsimParams,
    /// Sorted by `r`, then wavenumber.
    pub rows: Vec<SweepRow>,
    /// One entry per factor, in increasing `r`.
    pub aggregates: Vec<SweepAggregate>,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    if n == 0.0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl SweepReport {
    fn new(reference_wavenumber_cm1: f64, ssim_params: SsimParams, mut rows: Vec<SweepRow>) -> Self {
        rows.sort_by(|a, b| {
            a.r.cmp(&b.r)
                .then(a.wavenumber_cm1.total_cmp(&b.wavenumber_cm1))
        });
        let mut aggregates = Vec::new();
        for chunk in rows.chunk_by(|a, b| a.r == b.r) {
            let (mse_mean, mse_std) = mean_std(chunk.iter().map(|r| r.mse));
            let (ssim_mean, ssim_std) = mean_std(chunk.iter().map(|r| r.ssim));
            aggregates.push(SweepAggregate {
                r: chunk[0].r,
                dy_um: chunk[0].dy_um,
                n_bands: chunk.len(),
                mse_mean,
                mse_std,
                ssim_mean,
                ssim_std,
            });
        }
        Self {
            reference_wavenumber_cm1,
            ssim_params,
            rows,
            aggregates,
        }
    }

    pub fn aggregate(&self, r: usize) -> Option<&SweepAggregate> {
        self.aggregates.iter().find(|a| a.r == r)
    }

    /// Per-band rows, a blank line, the per-factor aggregate table and the
    /// SSIM parameters as a trailing comment.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,dy_um,wavenumber_cm1,mse,ssim\n");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                row.r, row.dy_um, row.wavenumber_cm1, row.mse, row.ssim
            );
        }
        out.push_str("\n# aggregate\nr,dy_um,n_bands,mse_mean,mse_std,ssim_mean,ssim_std\n");
        for a in &self.aggregates {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                a.r, a.dy_um, a.n_bands, a.mse_mean, a.mse_std, a.ssim_mean, a.ssim_std
            );
        }
        let p = &self.ssim_params;
        let _ = writeln!(
            out,
            "# ssim: window={} sigma={} k1={} k2={} dynamic_range={}",
            p.window, p.sigma, p.k1, p.k2, p.dynamic_range
        );
        out
    }
}

/// Decimates every non-reference band of `full_cube` by each factor,
/// reconstructs it and scores it against the original.
///
/// Factors are deduplicated and processed in increasing order. With
/// `DynamicRange::Auto` the SSIM range of each band is that of its ground
/// truth.
pub fn spacing_sweep(
    full_cube: &HyperCube,
    reference_wavenumber: f64,
    factors: &[usize],
    fusion: &FusionConfig,
    ssim_params: &SsimParams,
) -> Result<SweepReport> {
    ssim_params.validate()?;
    let mut factors = factors.to_vec();
    factors.sort_unstable();
    factors.dedup();
    if factors.is_empty() {
        return Err(Error::InvalidParameter("no sampling factors given".into()));
    }
    if let Some(&bad) = factors.iter().find(|&&r| r == 0 || r > full_cube.height()) {
        return Err(Error::InvalidParameter(format!(
            "factor {bad} is incompatible with a {}-row image",
            full_cube.height()
        )));
    }

    let mut rows = Vec::new();
    for &r in &factors {
        let set = build_acquisition_set(full_cube, reference_wavenumber, r)?;
        let rec = reconstruct_set(&set, fusion)?;
        let dy_um = full_cube.dx_um() * r as f64;
        let scored = full_cube
            .bands()
            .par_iter()
            .filter(|b| b.wavenumber_cm1() != set.reference().wavenumber_cm1())
            .map(|truth| {
                let idx = rec
                    .find_band(truth.wavenumber_cm1(), 0.0)
                    .expect("every sparse band is reconstructed");
                let band = rec.band(idx);
                Ok(SweepRow {
                    r,
                    dy_um,
                    wavenumber_cm1: truth.wavenumber_cm1(),
                    mse: mse(truth, band)?,
                    ssim: ssim(truth, band, ssim_params)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.extend(scored);
    }
    Ok(SweepReport::new(reference_wavenumber, *ssim_params, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(r: usize, wn: f64, m: f64) -> SweepRow {
        SweepRow {
            r,
            dy_um: 0.5 * r as f64,
            wavenumber_cm1: wn,
            mse: m,
            ssim: 1.0 - m,
        }
    }

    #[test]
    fn aggregates_and_csv_layout() {
        let rep = SweepReport::new(
            1660.0,
            SsimParams::default(),
            vec![row(4, 1000.0, 0.3), row(2, 1200.0, 0.2), row(2, 1000.0, 0.0)],
        );
        assert_eq!(rep.rows[0].wavenumber_cm1, 1000.0);
        assert_eq!(rep.rows[0].r, 2);
        let a = rep.aggregate(2).unwrap();
        assert_eq!(a.n_bands, 2);
        assert!((a.mse_mean - 0.1).abs() < 1e-15 && (a.mse_std - 0.1).abs() < 1e-15);
        let csv = rep.to_csv();
        assert!(csv.starts_with("r,dy_um,wavenumber_cm1,mse,ssim\n2,1,1000,0,1\n"));
        assert!(csv.contains("\n# aggregate\n"));
        assert!(csv.ends_with("dynamic_range=auto\n"));
    }
}
