use sparsefuse::acquisition::{build_acquisition_set, generate_phantom, PhantomSpec};
use sparsefuse::classifier::{build_dataset, predict_proba, train_rf, PixelDataset, TrainConfig};
use sparsefuse::reconstruction::{fuse_bands, reconstruct_set, upsample_to_height, FusionConfig};

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn reconstruction_matches_band_by_band_serial_run() {
    let (cube, _) = generate_phantom(&PhantomSpec::new(4, 64, 64)).unwrap();
    let set = build_acquisition_set(&cube, 1660.0, 4).unwrap();
    let cfg = FusionConfig::default();
    let parallel = reconstruct_set(&set, &cfg).unwrap();
    let pooled = single_threaded(|| reconstruct_set(&set, &cfg).unwrap());
    assert_eq!(parallel, pooled);
    for sparse in set.sparse_bands() {
        let interp = upsample_to_height(sparse, 64, cfg.gaussian_sigma_frac).unwrap();
        let fused = fuse_bands(&interp, set.reference(), 4, &cfg).unwrap();
        let i = parallel.find_band(sparse.wavenumber_cm1(), 0.0).unwrap();
        assert_eq!(parallel.band(i), &fused);
    }
    let reference = parallel.find_band(1660.0, 0.0).unwrap();
    assert_eq!(parallel.band(reference), set.reference());
}

#[test]
fn forest_is_independent_of_thread_count() {
    let (cube, labels) = generate_phantom(&PhantomSpec::new(2, 48, 48)).unwrap();
    let data = build_dataset(&cube, &labels, 200, 2).unwrap();
    let cfg = TrainConfig {
        n_trees: 6,
        seed: 9,
        ..Default::default()
    };
    let parallel = train_rf(&data, &cfg).unwrap();
    let serial = single_threaded(|| train_rf(&data, &cfg).unwrap());
    assert_eq!(parallel.to_json().unwrap(), serial.to_json().unwrap());
}

/// Vote share of `row`'s own class in a single depth-limited tree grown on
/// all rows plus `copies` duplicates of `row`.
fn own_vote(base: &PixelDataset, row: usize, copies: usize) -> f64 {
    let d = base.n_features();
    let mut features = base.features().to_vec();
    let mut labels = base.labels().to_vec();
    for _ in 0..copies {
        features.extend_from_slice(base.row(row));
        labels.push(base.labels()[row]);
    }
    let data = PixelDataset::new(d, features, labels).unwrap();
    let model = train_rf(
        &data,
        &TrainConfig {
            n_trees: 1,
            max_depth: Some(2),
            bootstrap: false,
            features_per_split: Some(d),
            seed: 1,
            ..Default::default()
        },
    )
    .unwrap();
    let proba = predict_proba(&model, base.row(row)).unwrap();
    let k = model.classes.iter().position(|&c| c == base.labels()[row]).unwrap();
    proba[0][k]
}

#[test]
fn duplicating_a_sample_never_lowers_its_own_vote() {
    let (cube, labels) = generate_phantom(&PhantomSpec::new(6, 48, 48)).unwrap();
    let data = build_dataset(&cube, &labels, 30, 6).unwrap();
    for row in [0, data.len() / 2, data.len() - 1] {
        let mut last = own_vote(&data, row, 0);
        for copies in 1..=4 {
            let v = own_vote(&data, row, copies);
            assert!(v >= last - 1e-12, "row {row}: {v} < {last} after {copies} copies");
            last = v;
        }
    }
}
