use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparsefuse::acquisition::simulate_sparse_acquisition;
use sparsefuse::classifier::{predict_proba, train_rf, PixelDataset, TrainConfig};
use sparsefuse::evaluation::{auc, mse, roc_curve, ssim, SsimParams};
use sparsefuse::image::BandImage;
use sparsefuse::reconstruction::{equalize_linear, fourier_interpolate, CurveletTransform};

fn random_band(seed: u64, w: usize, h: usize, dy: f64) -> BandImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pixels = (0..w * h).map(|_| rng.random_range(-1.0f32..1.0)).collect();
    BandImage::new(w, h, 0.5, dy, 1236.0, pixels).unwrap()
}

fn max_abs(a: &BandImage) -> f32 {
    a.pixels().iter().fold(0.0f32, |m, v| m.max(v.abs()))
}

fn brute_force_concordance(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, &si) in scores.iter().enumerate() {
        if !labels[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn curvelet_round_trip(seed in any::<u64>(), w in 32usize..72, h in 32usize..72) {
        let img = random_band(seed, w, h, 0.5);
        let t = CurveletTransform::new(w, h).unwrap();
        let coeffs = t.forward(&img).unwrap();
        let back = t.inverse(&coeffs).unwrap();
        let err = img.pixels().iter().zip(back.pixels()).map(|(a, b)| (a - b).abs()).fold(0.0f32, f32::max);
        prop_assert!(err <= 1e-6 * max_abs(&img), "error {err}");
        let energy: f64 = img.pixels().iter().map(|&v| (v as f64).powi(2)).sum();
        prop_assert!((coeffs.energy() / energy - 1.0).abs() < 1e-6);
    }

    #[test]
    fn curvelet_is_linear(seed in any::<u64>(), a in -3.0f64..3.0) {
        let (w, h) = (48, 40);
        let x = random_band(seed, w, h, 0.5);
        let y = random_band(seed ^ 0x5eed, w, h, 0.5);
        let combo = x
            .with_pixels(x.pixels().iter().zip(y.pixels()).map(|(&p, &q)| (a as f32) * p + q).collect())
            .unwrap();
        let t = CurveletTransform::new(w, h).unwrap();
        let (cx, cy, cc) = (t.forward(&x).unwrap(), t.forward(&y).unwrap(), t.forward(&combo).unwrap());
        for ((sx, sy), sc) in cx.scales().iter().zip(cy.scales()).zip(cc.scales()) {
            for ((wx, wy), wc) in sx.iter().zip(sy).zip(sc) {
                for ((p, q), r) in wx.data().iter().zip(wy.data()).zip(wc.data()) {
                    prop_assert!((p * a + q - r).norm() < 1e-4);
                }
            }
        }
    }

    #[test]
    fn mse_is_a_symmetric_nonnegative_distance(s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = random_band(s1, 9, 7, 0.5);
        let b = random_band(s2, 9, 7, 0.5);
        let ab = mse(&a, &b).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(ab, mse(&b, &a).unwrap());
        prop_assert_eq!(mse(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn ssim_is_bounded_and_one_on_identity(s1 in any::<u64>(), s2 in any::<u64>()) {
        let p = SsimParams::default();
        let a = random_band(s1, 24, 20, 0.5);
        let b = random_band(s2, 24, 20, 0.5);
        let v = ssim(&a, &b, &p).unwrap();
        prop_assert!((-1.0..=1.0).contains(&v));
        prop_assert_eq!(ssim(&a, &a, &p).unwrap(), 1.0);
    }

    #[test]
    fn auc_equals_pairwise_concordance(
        data in prop::collection::vec((0u8..6, any::<bool>()), 2..40)
    ) {
        let scores: Vec<f64> = data.iter().map(|&(s, _)| s as f64 / 5.0).collect();
        let labels: Vec<bool> = data.iter().map(|&(_, l)| l).collect();
        prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
        let a = auc(&roc_curve(&scores, &labels).unwrap()).unwrap();
        prop_assert!((a - brute_force_concordance(&scores, &labels)).abs() < 1e-9);
    }

    #[test]
    fn interpolation_preserves_mean(seed in any::<u64>(), h in 3usize..24, r in 1usize..7, sigma in 0.2f64..4.0) {
        let sparse = random_band(seed, 5, h, 0.5 * r as f64);
        let up = fourier_interpolate(&sparse, h * r, sigma).unwrap();
        prop_assert_eq!(up.dims(), (5, h * r));
        let scale = sparse.pixels().iter().map(|v| v.abs() as f64).sum::<f64>() / sparse.pixels().len() as f64;
        prop_assert!((up.mean() - sparse.mean()).abs() <= 1e-6 * scale.max(1.0));
    }

    #[test]
    fn decimation_keeps_exact_rows(seed in any::<u64>(), h in 1usize..30, r in 1usize..8) {
        let full = random_band(seed, 6, h, 0.5);
        let sparse = simulate_sparse_acquisition(&full, r).unwrap();
        prop_assert_eq!(sparse.height(), h.div_ceil(r));
        prop_assert_eq!(sparse.dy_um(), 0.5 * r as f64);
        for y in 0..sparse.height() {
            prop_assert_eq!(sparse.row(y), full.row(y * r));
        }
    }

    #[test]
    fn equalized_residual_is_uncorrelated_with_reference(s1 in any::<u64>(), s2 in any::<u64>()) {
        let reference = random_band(s1, 16, 12, 0.5);
        let target = random_band(s2, 16, 12, 0.5);
        let eq = equalize_linear(&reference, &target).unwrap();
        let n = reference.pixels().len() as f64;
        let rm = reference.mean();
        let cov: f64 = eq
            .image
            .pixels()
            .iter()
            .zip(target.pixels())
            .zip(reference.pixels())
            .map(|((&o, &t), &r)| (o as f64 - t as f64) * (r as f64 - rm))
            .sum::<f64>()
            / n;
        prop_assert!(cov.abs() < 1e-6);
        prop_assert!((eq.image.mean() - target.mean()).abs() < 1e-6);
    }

    #[test]
    fn forest_probabilities_sum_to_one(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 60;
        let features: Vec<f32> = (0..n * 3).map(|_| rng.random_range(0.0..1.0)).collect();
        let labels: Vec<u8> = (0..n).map(|i| (i % 3) as u8 + 1).collect();
        let data = PixelDataset::new(3, features.clone(), labels).unwrap();
        let model = train_rf(&data, &TrainConfig { n_trees: 7, seed, ..Default::default() }).unwrap();
        for p in predict_proba(&model, &features).unwrap() {
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }
}
