//! Acceptance gate: one PASS/FAIL line per criterion, with the measured
//! values indented underneath. Exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparsefuse::acquisition::{
    acquisition_time, build_acquisition_set, data_fraction, generate_phantom,
    simulate_sparse_acquisition, PhantomSpec, SamplingSpec, TimeModel, REFERENCE_WAVENUMBER,
};
use sparsefuse::classifier::{build_dataset_in, evaluate, train_rf, PixelRegion, TrainConfig};
use sparsefuse::evaluation::{auc, mse, roc_curve, spacing_sweep, ssim, SsimParams};
use sparsefuse::image::BandImage;
use sparsefuse::reconstruction::{
    fourier_interpolate, reconstruct_set, reconstruct_set_detailed, CurveletTransform, FusionConfig,
    DEFAULT_SIGMA_FRAC,
};

struct Outcome {
    pass: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            pass: true,
            details: Vec::new(),
        }
    }

    /// Records a detail line; a false `ok` fails the criterion.
    fn check(&mut self, ok: bool, line: String) {
        self.pass &= ok;
        self.details.push(format!("{} {line}", if ok { "ok  " } else { "MISS" }));
    }

    fn note(&mut self, line: String) {
        self.details.push(format!("     {line}"));
    }
}

fn band(w: usize, h: usize, pixels: Vec<f32>) -> BandImage {
    BandImage::new(w, h, 0.5, 0.5, 1236.0, pixels).unwrap()
}

fn table1_reproduction() -> Outcome {
    let mut out = Outcome::new();
    let model = TimeModel::default();
    let spec = |dy: f64| SamplingSpec::new(0.5, dy, 1500.0, 1500.0).unwrap();
    for (dy, minutes) in [(0.5, 90.0), (1.0, 45.0), (2.0, 23.0), (3.0, 15.0), (5.0, 9.0), (10.0, 4.5)] {
        let t = acquisition_time(&spec(dy), &model);
        out.check(
            (t - minutes).abs() <= 0.5,
            format!("dy {dy:>4} um: {t:.2} min (table {minutes})"),
        );
    }
    for (dy, pct) in [(0.5, 100.0), (1.0, 50.0), (2.0, 25.0), (5.0, 10.0), (10.0, 5.0), (20.0, 2.5)] {
        let f = 100.0 * data_fraction(&spec(dy));
        out.check(f == pct, format!("dy {dy:>4} um: {f}% (table {pct}%)"));
    }
    out.note(format!(
        "rounding exceptions: dy 3 gives {:.2}% (table 15%), dy 20 gives {:.2} min (table 2.5)",
        100.0 * data_fraction(&spec(3.0)),
        acquisition_time(&spec(20.0), &model)
    ));
    out
}

fn curvelet_round_trip() -> Outcome {
    let mut out = Outcome::new();
    let sizes = [(64, 64), (128, 96), (256, 256)];
    let transforms: Vec<_> = sizes.iter().map(|&(w, h)| CurveletTransform::new(w, h).unwrap()).collect();
    let (mut worst_err, mut worst_energy) = (0.0f64, 0.0f64);
    for seed in 0..50u64 {
        let k = seed as usize % sizes.len();
        let (w, h) = sizes[k];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let img = band(w, h, (0..w * h).map(|_| rng.random_range(-1.0f32..1.0)).collect());
        let coeffs = transforms[k].forward(&img).unwrap();
        let back = transforms[k].inverse(&coeffs).unwrap();
        let peak = img.pixels().iter().fold(0.0f32, |m, v| m.max(v.abs())) as f64;
        let err = img
            .pixels()
            .iter()
            .zip(back.pixels())
            .map(|(a, b)| (a - b).abs() as f64)
            .fold(0.0, f64::max);
        let energy: f64 = img.pixels().iter().map(|&v| (v as f64).powi(2)).sum();
        worst_err = worst_err.max(err / peak);
        worst_energy = worst_energy.max((coeffs.energy() / energy - 1.0).abs());
    }
    out.check(worst_err <= 1e-8, format!("max relative reconstruction error {worst_err:.2e} over 50 images"));
    out.check(worst_energy <= 1e-6, format!("max |energy ratio - 1| {worst_energy:.2e}"));
    out.note("the inverse runs in f64 and rounds to the f32 pixel type, so residuals below half an ulp vanish".into());
    out
}

fn interpolation_correctness() -> Outcome {
    let mut out = Outcome::new();
    let constant = BandImage::new(12, 30, 0.5, 2.5, 1236.0, vec![0.37; 360]).unwrap();
    let up = fourier_interpolate(&constant, 150, DEFAULT_SIGMA_FRAC).unwrap();
    let dev = up.pixels().iter().map(|&v| (v - 0.37).abs() as f64 / 0.37).fold(0.0, f64::max);
    out.check(dev <= 1e-6, format!("constant image, r=5: max relative deviation {dev:.2e}"));

    let (w, h, r) = (8, 200, 5);
    let f = 0.25 * 0.5 / r as f64;
    let full = band(w, h, (0..w * h).map(|i| (2.0 * PI * f * (i / w) as f64).sin() as f32).collect());
    let sparse = simulate_sparse_acquisition(&full, r).unwrap();
    let rel_err = |sigma_frac: f64| {
        let up = fourier_interpolate(&sparse, h, sigma_frac).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for (&a, &b) in up.pixels().iter().zip(full.pixels()) {
            num += (a as f64 - b as f64).powi(2);
            den += (b as f64).powi(2);
        }
        (num / den).sqrt()
    };
    let e = rel_err(2.0);
    out.check(e < 1e-2, format!("sinusoid at 25% of low-res Nyquist, r=5, sigma_frac 2.0: relative L2 {e:.2e}"));
    out.note(format!(
        "same sinusoid at the default sigma_frac {DEFAULT_SIGMA_FRAC}: relative L2 {:.2e} (window gain {:.4})",
        rel_err(DEFAULT_SIGMA_FRAC),
        (-(0.25f64).powi(2) / (2.0 * DEFAULT_SIGMA_FRAC.powi(2))).exp()
    ));
    out
}

fn fusion_beats_interpolation() -> Outcome {
    let mut out = Outcome::new();
    let params = SsimParams::default();
    let cfg = FusionConfig::default();
    for seed in 0..5u64 {
        let (truth, _) = generate_phantom(&PhantomSpec::new(seed, 256, 256)).unwrap();
        let set = build_acquisition_set(&truth, REFERENCE_WAVENUMBER, 10).unwrap();
        let (fused, interpolated) = reconstruct_set_detailed(&set, &cfg).unwrap();
        let mut losses = Vec::new();
        let (mut mi_sum, mut mf_sum) = (0.0, 0.0);
        for (sparse, interp) in set.sparse_bands().iter().zip(&interpolated) {
            let wn = sparse.wavenumber_cm1();
            let t = truth.band(truth.find_band(wn, 0.0).unwrap());
            let f = fused.band(fused.find_band(wn, 0.0).unwrap());
            let (mi, mf) = (mse(interp, t).unwrap(), mse(f, t).unwrap());
            let (si, sf) = (ssim(t, interp, &params).unwrap(), ssim(t, f, &params).unwrap());
            mi_sum += mi;
            mf_sum += mf;
            if !(mf < mi && sf > si) {
                losses.push(format!("{wn:.0} (mse {mi:.2e}->{mf:.2e}, ssim {si:.4}->{sf:.4})"));
            }
        }
        let n = set.sparse_bands().len();
        out.check(
            losses.is_empty(),
            format!(
                "seed {seed}: fused better on {}/{n} bands, mean mse {:.2e} -> {:.2e}",
                n - losses.len(),
                mi_sum / n as f64,
                mf_sum / n as f64
            ),
        );
        for l in losses {
            out.note(format!("  not improved: {l}"));
        }
    }
    out
}

fn spacing_trend() -> Outcome {
    let mut out = Outcome::new();
    let (cube, _) = generate_phantom(&PhantomSpec::new(0, 256, 256)).unwrap();
    let report = spacing_sweep(
        &cube,
        REFERENCE_WAVENUMBER,
        &[1, 2, 4, 6, 10, 20, 40],
        &FusionConfig::default(),
        &SsimParams::default(),
    )
    .unwrap();
    let identity = report.rows.iter().filter(|r| r.r == 1).all(|r| r.mse == 0.0 && r.ssim == 1.0);
    out.check(identity, "r=1: mse 0 and ssim 1 exactly on every band".into());
    for a in &report.aggregates {
        out.note(format!("r={:<3} mean mse {:.4e}  mean ssim {:.5}", a.r, a.mse_mean, a.ssim_mean));
    }
    for pair in report.aggregates.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        out.check(
            b.mse_mean >= a.mse_mean,
            format!("mse nondecreasing r={} -> r={}", a.r, b.r),
        );
        out.check(
            b.ssim_mean <= a.ssim_mean,
            format!("ssim nonincreasing r={} -> r={}", a.r, b.r),
        );
    }
    out
}

fn brute_force_concordance(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    let pos = scores.iter().zip(labels).filter(|p| *p.1).map(|p| *p.0);
    for si in pos {
        for sj in scores.iter().zip(labels).filter(|p| !*p.1).map(|p| *p.0) {
            pairs += 1.0;
            wins += if si > sj { 1.0 } else if si == sj { 0.5 } else { 0.0 };
        }
    }
    wins / pairs
}

fn metric_oracles() -> Outcome {
    let mut out = Outcome::new();
    let zeros = band(2, 2, vec![0.0; 4]);
    let ones = band(2, 2, vec![1.0; 4]);
    let ramp = band(2, 2, vec![1.0, 2.0, 3.0, 4.0]);
    out.check(mse(&ramp, &ramp).unwrap() == 0.0, "mse(x, x) = 0".into());
    out.check(mse(&zeros, &ones).unwrap() == 1.0, "mse(0, 1) = 1".into());
    let m = mse(&zeros, &ramp).unwrap();
    out.check(m == 7.5, format!("mse([0,0,0,0], [1,2,3,4]) = {m}"));

    let p = SsimParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut all_one = true;
    for _ in 0..20 {
        let (w, h) = (rng.random_range(11..40), rng.random_range(11..40));
        let img = band(w, h, (0..w * h).map(|_| rng.random_range(-5.0f32..5.0)).collect());
        all_one &= ssim(&img, &img, &p).unwrap() == 1.0;
    }
    out.check(all_one, "ssim(x, x) = 1 exactly on 20 random images".into());

    let worked = auc(&roc_curve(&[0.9, 0.8, 0.3, 0.2], &[true, true, false, true]).unwrap()).unwrap();
    out.check((worked - 2.0 / 3.0).abs() <= 1e-9, format!("worked example AUC {worked:.12}"));
    let mut worst = 0.0f64;
    let mut instances = 0;
    while instances < 200 {
        let n = rng.random_range(2..=50);
        let levels = rng.random_range(2..12);
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64 / levels as f64).collect();
        let labels: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
            continue;
        }
        let a = auc(&roc_curve(&scores, &labels).unwrap()).unwrap();
        worst = worst.max((a - brute_force_concordance(&scores, &labels)).abs());
        instances += 1;
    }
    out.check(worst <= 1e-9, format!("AUC vs pairwise concordance, 200 tied instances: max gap {worst:.1e}"));
    out
}

/// Overall accuracy on the right half with truth and r=10 spectra, training
/// on the left half of the truth.
fn half_split_accuracy(size: usize, seed: u64) -> (f64, f64, Option<f64>) {
    let (truth, labels) = generate_phantom(&PhantomSpec::new(seed, size, size)).unwrap();
    let recon = reconstruct_set(
        &build_acquisition_set(&truth, REFERENCE_WAVENUMBER, 10).unwrap(),
        &FusionConfig::default(),
    )
    .unwrap();
    let cfg = TrainConfig {
        per_class_cap: 10_000,
        seed,
        ..Default::default()
    };
    let train = build_dataset_in(&truth, &labels, PixelRegion::left_half(size, size), cfg.per_class_cap, seed).unwrap();
    let model = train_rf(&train, &cfg).unwrap();
    let right = PixelRegion::right_half(size, size);
    let score = |cube| {
        let test = build_dataset_in(cube, &labels, right, cfg.per_class_cap, seed).unwrap();
        evaluate(&model, &test).unwrap().overall_accuracy
    };
    (score(&truth), score(&recon), model.oob_accuracy)
}

fn classification_preserved() -> Outcome {
    let mut out = Outcome::new();
    let (a, b, oob) = half_split_accuracy(512, 0);
    out.check(a > 0.95, format!("512x512 phantom, truth spectra: overall accuracy {a:.4} (oob {:.4})", oob.unwrap_or(f64::NAN)));
    out.check(
        (a - b).abs() <= 0.05,
        format!("r=10 reconstruction: overall accuracy {b:.4}, gap {:.2} points", 100.0 * (a - b)),
    );
    let (a2, b2, _) = half_split_accuracy(256, 0);
    out.note(format!(
        "for reference, 256x256 phantom: truth {a2:.4}, reconstruction {b2:.4}, gap {:.2} points",
        100.0 * (a2 - b2)
    ));
    out
}

fn run_cli(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_sparsefuse"))
        .args(args)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

/// Every file under `dir`, relative path first, sorted.
fn files(dir: &Path) -> Vec<(String, std::path::PathBuf)> {
    let mut v = Vec::new();
    for sub in ["cubes", "plots", "reports", "models"] {
        if let Ok(entries) = fs::read_dir(dir.join(sub)) {
            for e in entries.flatten() {
                v.push((format!("{sub}/{}", e.file_name().to_string_lossy()), e.path()));
            }
        }
    }
    v.sort();
    v
}

fn cli_determinism() -> Outcome {
    let mut out = Outcome::new();
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    fs::write(
        &cfg,
        r#"{
  "seed": 21,
  "input": {"kind": "phantom", "width": 128, "height": 128},
  "factors": [1, 2, 10],
  "acquisition_factor": 10,
  "train": {"n_trees": 20, "per_class_cap": 2000}
}"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    for command in ["phantom", "acquire", "reconstruct", "sweep", "classify", "pipeline"] {
        let runs: Vec<_> = ["a", "b"]
            .iter()
            .map(|run| dir.path().join(command).join(run))
            .collect();
        let ok = runs.iter().all(|o| run_cli(&[command, "--config", cfg, "--out", o.to_str().unwrap()]));
        if !ok {
            out.check(false, format!("{command}: command failed"));
            continue;
        }
        let (fa, fb) = (files(&runs[0]), files(&runs[1]));
        let same_set = fa.iter().map(|f| &f.0).eq(fb.iter().map(|f| &f.0));
        let (mut reports, mut images, mut differing) = (0, 0, Vec::new());
        for ((name, pa), (_, pb)) in fa.iter().zip(&fb) {
            let equal = if name.ends_with(".png") {
                images += 1;
                image::open(pa).unwrap().into_bytes() == image::open(pb).unwrap().into_bytes()
            } else {
                if name.ends_with(".json") || name.ends_with(".csv") {
                    reports += 1;
                }
                fs::read(pa).unwrap() == fs::read(pb).unwrap()
            };
            if !equal {
                differing.push(name.clone());
            }
        }
        out.check(
            same_set && differing.is_empty() && reports > 0,
            format!(
                "{command}: {} files identical ({reports} JSON/CSV, {images} PNG compared decoded){}",
                fa.len(),
                if differing.is_empty() { String::new() } else { format!("; differ: {}", differing.join(", ")) }
            ),
        );
    }
    out
}

fn main() {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check); 8] = [
        ("1 Table 1 acquisition time and data fraction", table1_reproduction),
        ("2 curvelet round trip and tight frame", curvelet_round_trip),
        ("3 Fourier interpolation correctness", interpolation_correctness),
        ("4 fusion improves on interpolation at r=10", fusion_beats_interpolation),
        ("5 spacing sweep trend", spacing_trend),
        ("6 metric oracles", metric_oracles),
        ("7 classification preserved after reconstruction", classification_preserved),
        ("8 CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        println!(
            "{} criterion {name} ({:.1} s)",
            if outcome.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        for line in &outcome.details {
            println!("    {line}");
        }
        if !outcome.pass {
            failed += 1;
        }
    }
    println!("{} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
