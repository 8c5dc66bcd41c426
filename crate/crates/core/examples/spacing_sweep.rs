//! Reconstruction error against row spacing, written as CSV and SVG.
//!
//! Usage: `cargo run --release --example spacing_sweep -- [out_dir]`

use std::path::PathBuf;

use sparsefuse::acquisition::{generate_phantom, PhantomSpec, REFERENCE_WAVENUMBER};
use sparsefuse::evaluation::plot::{line_plot, Series};
use sparsefuse::evaluation::{spacing_sweep, SsimParams};
use sparsefuse::reconstruction::FusionConfig;
use sparsefuse::Error;

fn main() -> sparsefuse::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "sweep-out".into()));
    std::fs::create_dir_all(&out).map_err(|e| Error::Io { path: out.clone(), source: e })?;

    let (cube, _) = generate_phantom(&PhantomSpec::new(0, 128, 128))?;
    let report = spacing_sweep(
        &cube,
        REFERENCE_WAVENUMBER,
        &[1, 2, 4, 6, 10, 20, 40],
        &FusionConfig::default(),
        &SsimParams::default(),
    )?;
    for a in &report.aggregates {
        println!(
            "r={:<3} mse {:.3e} +/- {:.1e}  ssim {:.4} +/- {:.4}",
            a.r, a.mse_mean, a.mse_std, a.ssim_mean, a.ssim_std
        );
    }

    let ssim = Series::new(
        "SSIM",
        report.aggregates.iter().map(|a| (a.r as f64, a.ssim_mean)).collect(),
    )
    .with_errors(report.aggregates.iter().map(|a| a.ssim_std).collect());
    let write = |name: &str, text: String| {
        let path = out.join(name);
        std::fs::write(&path, text).map_err(|e| Error::Io { path, source: e })
    };
    write("sweep.csv", report.to_csv())?;
    write("sweep_ssim.svg", line_plot("SSIM vs row factor", "r", "SSIM", &[ssim]))?;
    println!("written to {}", out.display());
    Ok(())
}
