//! Scan time and data fraction for interleaved row sampling of a
//! 1500 x 1500 um region at 0.5 um pixels.

use sparsefuse::acquisition::{acquisition_time, data_fraction, SamplingSpec, TimeModel};

fn main() -> sparsefuse::Result<()> {
    let model = TimeModel::default();
    println!("{:>8} {:>10} {:>10}", "dy (um)", "minutes", "fraction");
    for dy in [0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 20.0] {
        let spec = SamplingSpec::new(0.5, dy, 1500.0, 1500.0)?;
        println!(
            "{dy:>8} {:>10.1} {:>9.1}%",
            acquisition_time(&spec, &model),
            100.0 * data_fraction(&spec)
        );
    }
    Ok(())
}
