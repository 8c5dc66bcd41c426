//! Forward and inverse curvelet transform of a random image: coefficient
//! layout, energy preservation and reconstruction error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparsefuse::image::BandImage;
use sparsefuse::reconstruction::CurveletTransform;

fn main() -> sparsefuse::Result<()> {
    let (w, h) = (256, 192);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pixels: Vec<f32> = (0..w * h).map(|_| rng.random_range(-1.0..1.0)).collect();
    let img = BandImage::new(w, h, 0.5, 0.5, 1660.0, pixels)?;

    let t = CurveletTransform::new(w, h)?;
    println!("{w}x{h}: {} scales, {} coefficients", t.nscales(), t.coefficient_count());
    for j in 0..t.nscales() {
        let shapes = t.wedge_shapes(j);
        println!("  scale {j}: {:>3} wedges, first {:?}", shapes.len(), shapes[0]);
    }

    let coeffs = t.forward(&img)?;
    let back = t.inverse(&coeffs)?;
    let energy: f64 = img.pixels().iter().map(|&v| (v as f64).powi(2)).sum();
    let max_err = img
        .pixels()
        .iter()
        .zip(back.pixels())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f32, f32::max);
    println!("energy ratio {:.12}", coeffs.energy() / energy);
    println!("max reconstruction error {max_err:.2e}");
    Ok(())
}
