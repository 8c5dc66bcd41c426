//! Trains a random forest on the left half of a phantom and scores it on the
//! right half, once on the true spectra and once on spectra reconstructed
//! from every tenth row.

use sparsefuse::acquisition::{build_acquisition_set, generate_phantom, PhantomSpec, REFERENCE_WAVENUMBER};
use sparsefuse::classifier::{build_dataset_in, evaluate, train_rf, PixelRegion, TrainConfig};
use sparsefuse::reconstruction::{reconstruct_set, FusionConfig};

fn main() -> sparsefuse::Result<()> {
    let (w, h) = (256, 256);
    let (truth, labels) = generate_phantom(&PhantomSpec::new(0, w, h))?;
    let reconstructed = reconstruct_set(
        &build_acquisition_set(&truth, REFERENCE_WAVENUMBER, 10)?,
        &FusionConfig::default(),
    )?;

    let cfg = TrainConfig {
        n_trees: 50,
        ..Default::default()
    };
    let train = build_dataset_in(&truth, &labels, PixelRegion::left_half(w, h), cfg.per_class_cap, 0)?;
    let model = train_rf(&train, &cfg)?;
    println!("{} trees, out-of-bag accuracy {:.4}", model.trees.len(), model.oob_accuracy.unwrap_or(f64::NAN));

    let right = PixelRegion::right_half(w, h);
    for (name, cube) in [("truth", &truth), ("reconstructed", &reconstructed)] {
        let test = build_dataset_in(cube, &labels, right, cfg.per_class_cap, 0)?;
        let e = evaluate(&model, &test)?;
        println!("{name}: overall accuracy {:.4}", e.overall_accuracy);
        for c in &e.per_class {
            println!("  {:<10} recall {:.4}  AUC {:.4}", c.name, c.accuracy, c.auc.unwrap_or(f64::NAN));
        }
        print!("{}", e.confusion_csv());
    }
    Ok(())
}
