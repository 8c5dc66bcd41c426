//! Generates a labeled three-class phantom and writes it as a raw cube,
//! a label map and PNG previews.
//!
//! Usage: `cargo run --release --example phantom -- [out_dir] [seed]`

use std::path::PathBuf;

use sparsefuse::acquisition::{generate_phantom, PhantomSpec, REFERENCE_WAVENUMBER};
use sparsefuse::image::{export_label_png, export_png, save_cube, save_label_map};

fn main() -> sparsefuse::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "phantom-out".into()));
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    std::fs::create_dir_all(&out).map_err(|e| sparsefuse::Error::Io {
        path: out.clone(),
        source: e,
    })?;

    let spec = PhantomSpec::new(seed, 256, 256);
    let (cube, labels) = generate_phantom(&spec)?;
    save_cube(&cube, out.join("phantom"))?;
    save_label_map(&labels, cube.dx_um(), cube.dy_um(), out.join("labels"))?;
    export_label_png(&labels, out.join("labels.png"))?;
    let reference = cube.find_band(REFERENCE_WAVENUMBER, 0.5).expect("default bands include Amide I");
    export_png(cube.band(reference), out.join("amide_i.png"), None)?;

    let hist = labels.histogram();
    println!("{}x{} px, {} bands", cube.width(), cube.height(), cube.len());
    for class in labels.present_classes() {
        println!("  {:<10} {:>6} px", class.name(), hist[class.code() as usize]);
    }
    println!("  {:<10} {:>6} px", "background", hist[0]);
    println!("written to {}", out.display());
    Ok(())
}
