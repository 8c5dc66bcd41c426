use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sparsefuse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparsefuse"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = r#"{
  "seed": 11,
  "input": {"kind": "phantom", "width": 64, "height": 64},
  "factors": [1, 4],
  "acquisition_factor": 4,
  "train": {"n_trees": 4, "per_class_cap": 150}
}"#;

#[test]
fn zero_class_phantom_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"seed": 1, "input": {"kind": "phantom", "width": 64, "height": 64, "classes": []}}"#,
    );
    let out = sparsefuse(&["phantom", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("at least one class"));
}

#[test]
fn missing_seed_and_bad_config_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("o");
    let out = sparsefuse(&["phantom", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let cfg = write_config(dir.path(), r#"{"seed": 1, "factor": [2]}"#);
    let out = sparsefuse(&["sweep", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = sparsefuse(&["classify", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cube = dir.path().join("cube");
    fs::write(cube.with_extension("json"), "{}").unwrap();
    let cfg = write_config(
        dir.path(),
        &format!(r#"{{"seed": 1, "input": {{"kind": "cube", "path": "{}"}}}}"#, cube.display()),
    );
    let out = sparsefuse(&["sweep", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn phantom_summary_and_default_bands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out_dir = dir.path().join("o");
    let out = sparsefuse(&["phantom", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("28 bands (908..1786 cm-1)"), "{stdout}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("reports/phantom.json")).unwrap()).unwrap();
    assert_eq!(report["wavenumbers_cm1"].as_array().unwrap().len(), 28);
}

#[test]
fn acquire_reports_table_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out_dir = dir.path().join("o");
    let out = sparsefuse(&[
        "acquire", "--config", &cfg, "--out", out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("full 90.0 min"), "{stdout}");
    assert!(stdout.contains("sparse 22.5 min"), "{stdout}");
}

#[test]
fn flag_overrides_reach_the_echoed_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out_dir = dir.path().join("o");
    let out = sparsefuse(&[
        "sweep",
        "--config", &cfg,
        "--out", out_dir.to_str().unwrap(),
        "--seed", "5",
        "--factors", "1,2",
        "--cutoff", "1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let echoed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("reports/config.json")).unwrap()).unwrap();
    assert_eq!(echoed["seed"], 5);
    assert_eq!(echoed["factors"], serde_json::json!([1, 2]));
    assert_eq!(echoed["fusion"]["cutoff_scale"], 1);
    let csv = fs::read_to_string(out_dir.join("reports/sweep.csv")).unwrap();
    assert!(csv.starts_with("r,dy_um,wavenumber_cm1,mse,ssim\n"));
}

#[test]
fn classify_emits_three_roc_plots_and_class_maps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out_dir = dir.path().join("o");
    let out = sparsefuse(&["classify", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for class in ["epithelium", "stroma", "necrosis"] {
        assert!(out_dir.join(format!("plots/roc_{class}.svg")).exists());
    }
    for f in ["classes_ground_truth", "classes_truth_spectra", "classes_reconstructed_spectra"] {
        assert!(out_dir.join(format!("plots/{f}.png")).exists());
    }
    let metrics: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("reports/metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["train_region"], "left half");
    assert!(metrics["truth"]["overall_accuracy"].as_f64().unwrap() > 0.9);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = sparsefuse(&["pipeline", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for rel in [
        "reports/config.json",
        "reports/phantom.json",
        "reports/acquisition.json",
        "reports/reconstruction.json",
        "reports/sweep.csv",
        "reports/sweep.json",
        "reports/metrics.json",
        "reports/confusion_truth.csv",
        "reports/confusion_reconstructed.csv",
        "models/forest.json",
        "cubes/reconstructed.raw",
    ] {
        assert_eq!(fs::read(a.join(rel)).unwrap(), fs::read(b.join(rel)).unwrap(), "{rel} differs");
    }
}
