//! Upsamples a row-decimated sinusoid with spectral zero-padding and
//! compares it with the analytic full-resolution signal for several Gaussian
//! window widths.

use std::f64::consts::PI;

use sparsefuse::acquisition::simulate_sparse_acquisition;
use sparsefuse::image::BandImage;
use sparsefuse::reconstruction::fourier_interpolate;

fn main() -> sparsefuse::Result<()> {
    let (w, h, r) = (16, 200, 5);
    // A quarter of the decimated grid's Nyquist frequency, in cycles per pixel.
    let f = 0.25 * 0.5 / r as f64;
    let full = BandImage::from_fn(w, h, 0.5, 1236.0, |_, y| (2.0 * PI * f * y as f64).sin() as f32)?;
    let sparse = simulate_sparse_acquisition(&full, r)?;
    println!("{}x{} decimated by {r} to {} rows", w, h, sparse.height());

    let norm: f64 = full.pixels().iter().map(|&v| (v as f64).powi(2)).sum::<f64>().sqrt();
    for sigma_frac in [0.5, 1.0, 2.0, f64::INFINITY] {
        let up = fourier_interpolate(&sparse, h, sigma_frac)?;
        let err: f64 = up
            .pixels()
            .iter()
            .zip(full.pixels())
            .map(|(&a, &b)| (a as f64 - b as f64).powi(2))
            .sum::<f64>()
            .sqrt();
        println!("sigma_frac {sigma_frac:>4}: relative L2 error {:.2e}", err / norm);
    }
    Ok(())
}
