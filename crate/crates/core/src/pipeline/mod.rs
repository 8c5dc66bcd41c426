//! Batch commands behind the `sparsefuse` binary.
//!
//! Every command reads one [`PipelineConfig`], writes under
//! `<out>/{cubes,plots,reports,models}` and echoes the effective config to
//! `reports/config.json`. Reports hold no timings or host details, so
//! repeated runs with the same config produce identical JSON and CSV bytes.

mod config;

pub use config::{InputSource, Overrides, PhantomInput, PipelineConfig, RegionConfig};

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::acquisition::{
    acquisition_time, build_acquisition_set, data_fraction, generate_phantom, SamplingSpec,
};
use crate::classifier::{
    build_dataset_in, classify_cube, evaluate, train_rf, Evaluation, PixelRegion,
};
use crate::error::{Error, Result};
use crate::evaluation::plot::{line_plot, roc_plot, Series};
use crate::evaluation::{mse, spacing_sweep, ssim, SweepReport};
use crate::image::{
    export_label_png, export_png, export_triptych_png, load_cube, load_label_map, save_cube,
    save_label_map, AcquisitionSet, BandImage, HyperCube, LabelMap, TissueClass,
};
use crate::reconstruction::curvelet::MIN_SIZE;
use crate::reconstruction::{reconstruct_set_detailed, scale_count};

/// Output directory used when neither the config nor the command line names one.
pub const DEFAULT_OUTPUT_DIR: &str = "sparsefuse-out";

const SUBDIRS: [&str; 4] = ["cubes", "plots", "reports", "models"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Phantom,
    Acquire,
    Reconstruct,
    Sweep,
    Classify,
    /// Every stage in order.
    Pipeline,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Phantom,
        Command::Acquire,
        Command::Reconstruct,
        Command::Sweep,
        Command::Classify,
        Command::Pipeline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Phantom => "phantom",
            Command::Acquire => "acquire",
            Command::Reconstruct => "reconstruct",
            Command::Sweep => "sweep",
            Command::Classify => "classify",
            Command::Pipeline => "pipeline",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown command {s:?}")))
    }
}

/// Process exit status for a failed command: 2 for configuration and
/// validation problems, 1 for everything else.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Json(_) | Error::InvalidParameter(_) | Error::Unsupported { .. } => 2,
        _ => 1,
    }
}

#[derive(Debug, Serialize)]
struct PhantomReport {
    width: usize,
    height: usize,
    pixel_um: f64,
    wavenumbers_cm1: Vec<f64>,
    background_pixels: usize,
    class_pixels: Vec<ClassCount>,
}

#[derive(Debug, Serialize)]
struct ClassCount {
    class: u8,
    name: &'static str,
    pixels: usize,
}

#[derive(Debug, Serialize)]
struct AcquisitionReport {
    r: usize,
    reference_wavenumber_cm1: f64,
    width: usize,
    height: usize,
    sparse_height: usize,
    sparse_bands: usize,
    dx_um: f64,
    dy_um: f64,
    region_width_um: f64,
    region_height_um: f64,
    full_minutes_per_band: f64,
    sparse_minutes_per_band: f64,
    data_fraction: f64,
    speedup: f64,
}

#[derive(Debug, Serialize)]
struct BandScore {
    wavenumber_cm1: f64,
    r: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    mse_interpolated: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mse_fused: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ssim_interpolated: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ssim_fused: Option<f64>,
}

#[derive(Debug, Serialize)]
struct ReconstructionReport {
    reference_wavenumber_cm1: f64,
    width: usize,
    height: usize,
    curvelet_scales: usize,
    bands: Vec<BandScore>,
}

#[derive(Debug, Serialize)]
struct TrainSummary {
    n_samples: usize,
    per_class_cap: usize,
    classes: Vec<u8>,
    dropped_classes: Vec<u8>,
    oob_accuracy: Option<f64>,
}

#[derive(Debug, Serialize)]
struct ClassificationReport {
    r: usize,
    train_region: &'static str,
    test_region: &'static str,
    train: TrainSummary,
    truth: Evaluation,
    reconstructed: Evaluation,
    accuracy_gap: f64,
}

/// Full-resolution data available to a command.
struct FullData {
    cube: HyperCube,
    labels: Option<LabelMap>,
}

/// A validated configuration bound to an output directory.
pub struct Pipeline {
    cfg: PipelineConfig,
    out: PathBuf,
}

impl Pipeline {
    /// Validates `cfg` for `command`, creates the output tree and echoes the
    /// effective config. Errors here are configuration errors.
    pub fn prepare(mut cfg: PipelineConfig, command: Command) -> Result<Self> {
        cfg.train.seed = cfg.seed;
        cfg.validate()?;
        check_input(&cfg, command)?;
        let out = cfg
            .output_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
        for sub in SUBDIRS {
            let dir = out.join(sub);
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
        let pipeline = Self { cfg, out };
        pipeline.write_text("reports/config.json", &pipeline.cfg.to_json()?)?;
        Ok(pipeline)
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn output_dir(&self) -> &Path {
        &self.out
    }

    /// Runs `command` and returns human-readable summary lines.
    pub fn run(&self, command: Command) -> Result<Vec<String>> {
        match command {
            Command::Phantom => self.phantom(),
            Command::Acquire => self.acquire(),
            Command::Reconstruct => self.reconstruct(),
            Command::Sweep => self.sweep(),
            Command::Classify => self.classify(),
            Command::Pipeline => {
                let mut lines = Vec::new();
                let stages = [
                    Command::Phantom,
                    Command::Acquire,
                    Command::Reconstruct,
                    Command::Sweep,
                    Command::Classify,
                ];
                for stage in stages {
                    if stage == Command::Phantom && !matches!(self.cfg.input, InputSource::Phantom(_)) {
                        continue;
                    }
                    if check_input(&self.cfg, stage).is_err() {
                        lines.push(format!("[{stage}] skipped: input lacks what it needs"));
                        continue;
                    }
                    lines.extend(self.run(stage)?.into_iter().map(|l| format!("[{stage}] {l}")));
                }
                Ok(lines)
            }
        }
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.out.join(rel)
    }

    fn write_text(&self, rel: &str, text: &str) -> Result<()> {
        let path = self.path(rel);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    fn write_json(&self, rel: &str, value: &impl Serialize) -> Result<()> {
        self.write_text(rel, &(serde_json::to_string_pretty(value)? + "\n"))
    }

    fn full_data(&self) -> Result<FullData> {
        match &self.cfg.input {
            InputSource::Phantom(p) => {
                let (cube, labels) = generate_phantom(&p.to_spec(self.cfg.seed))?;
                Ok(FullData {
                    cube,
                    labels: Some(labels),
                })
            }
            InputSource::Cube { path, labels } => Ok(FullData {
                cube: load_cube(path)?,
                labels: labels.as_ref().map(load_label_map).transpose()?,
            }),
            InputSource::Acquisition { truth, labels, .. } => {
                let truth = truth
                    .as_ref()
                    .ok_or_else(|| Error::Config("this command needs a full-resolution truth cube".into()))?;
                Ok(FullData {
                    cube: load_cube(truth)?,
                    labels: labels.as_ref().map(load_label_map).transpose()?,
                })
            }
        }
    }

    /// The acquisition set and, when known, the full-resolution truth.
    fn acquisition(&self) -> Result<(AcquisitionSet, Option<FullData>)> {
        if let InputSource::Acquisition {
            reference, sparse, ..
        } = &self.cfg.input
        {
            let reference_cube = load_cube(reference)?;
            if reference_cube.len() != 1 {
                return Err(Error::InvalidImage(format!(
                    "reference cube must hold one band, found {}",
                    reference_cube.len()
                )));
            }
            let reference = reference_cube.into_bands().remove(0);
            let set = AcquisitionSet::new(reference, load_cube(sparse)?.into_bands())?;
            let truth = match self.full_data() {
                Ok(full) => Some(full),
                Err(Error::Config(_)) => None,
                Err(e) => return Err(e),
            };
            return Ok((set, truth));
        }
        let full = self.full_data()?;
        let set = build_acquisition_set(
            &full.cube,
            self.cfg.reference_wavenumber,
            self.cfg.acquisition_factor,
        )?;
        Ok((set, Some(full)))
    }

    fn phantom(&self) -> Result<Vec<String>> {
        let InputSource::Phantom(p) = &self.cfg.input else {
            return Err(Error::Config("the phantom command needs a phantom input".into()));
        };
        let spec = p.to_spec(self.cfg.seed);
        let (cube, labels) = generate_phantom(&spec)?;
        save_cube(&cube, self.path("cubes/phantom"))?;
        save_label_map(&labels, cube.dx_um(), cube.dy_um(), self.path("cubes/labels"))?;
        export_label_png(&labels, self.path("plots/phantom_labels.png"))?;
        if let Some(i) = cube.find_band(self.cfg.reference_wavenumber, 0.5) {
            export_png(cube.band(i), self.path("plots/phantom_reference.png"), None)?;
        }
        let hist = labels.histogram();
        let report = PhantomReport {
            width: cube.width(),
            height: cube.height(),
            pixel_um: cube.dx_um(),
            wavenumbers_cm1: cube.wavenumbers(),
            background_pixels: hist[0],
            class_pixels: TissueClass::ALL
                .iter()
                .map(|c| ClassCount {
                    class: c.code(),
                    name: c.name(),
                    pixels: hist[c.code() as usize],
                })
                .collect(),
        };
        self.write_json("reports/phantom.json", &report)?;
        let classes: Vec<String> = report
            .class_pixels
            .iter()
            .map(|c| format!("{} {}", c.name, c.pixels))
            .collect();
        Ok(vec![
            format!(
                "phantom {}x{} px at {} um, {} bands ({:.0}..{:.0} cm-1)",
                cube.width(),
                cube.height(),
                cube.dx_um(),
                cube.len(),
                report.wavenumbers_cm1[0],
                report.wavenumbers_cm1[cube.len() - 1]
            ),
            format!(
                "{} classes: {}; background {}",
                spec.classes.len(),
                classes.join(", "),
                hist[0]
            ),
        ])
    }

    fn acquire(&self) -> Result<Vec<String>> {
        let full = self.full_data()?;
        let r = self.cfg.acquisition_factor;
        let set = build_acquisition_set(&full.cube, self.cfg.reference_wavenumber, r)?;
        save_cube(
            &HyperCube::new(vec![set.reference().clone()])?,
            self.path("cubes/reference"),
        )?;
        let sparse_height = set.sparse_bands().first().map_or(0, BandImage::height);
        if !set.sparse_bands().is_empty() {
            save_cube(
                &HyperCube::new(set.sparse_bands().to_vec())?,
                self.path("cubes/sparse"),
            )?;
        }
        let dx = full.cube.dx_um();
        let region = self.cfg.sampling;
        let full_spec = SamplingSpec::new(dx, dx, region.region_width_um, region.region_height_um)?;
        let sparse_spec =
            SamplingSpec::new(dx, r as f64 * dx, region.region_width_um, region.region_height_um)?;
        let full_min = acquisition_time(&full_spec, &self.cfg.time_model);
        let sparse_min = acquisition_time(&sparse_spec, &self.cfg.time_model);
        let report = AcquisitionReport {
            r,
            reference_wavenumber_cm1: set.reference().wavenumber_cm1(),
            width: full.cube.width(),
            height: full.cube.height(),
            sparse_height,
            sparse_bands: set.sparse_bands().len(),
            dx_um: dx,
            dy_um: sparse_spec.dy_um,
            region_width_um: region.region_width_um,
            region_height_um: region.region_height_um,
            full_minutes_per_band: full_min,
            sparse_minutes_per_band: sparse_min,
            data_fraction: data_fraction(&sparse_spec),
            speedup: full_min / sparse_min,
        };
        self.write_json("reports/acquisition.json", &report)?;
        Ok(vec![
            format!(
                "reference {:.0} cm-1 kept at {}x{}; {} bands decimated by r={r} to {} rows",
                report.reference_wavenumber_cm1,
                report.width,
                report.height,
                report.sparse_bands,
                sparse_height
            ),
            format!(
                "per band over {}x{} um: full {:.1} min at dy={dx} um, sparse {:.1} min at dy={} um, data fraction {:.1}%",
                region.region_width_um,
                region.region_height_um,
                full_min,
                sparse_min,
                report.dy_um,
                100.0 * report.data_fraction
            ),
        ])
    }

    fn reconstruct(&self) -> Result<Vec<String>> {
        let (set, truth) = self.acquisition()?;
        let reference = set.reference();
        if reference.width().min(reference.height()) < MIN_SIZE {
            return Err(Error::TooSmall {
                width: reference.width(),
                height: reference.height(),
                min: MIN_SIZE,
            });
        }
        let (cube, interpolated) = reconstruct_set_detailed(&set, &self.cfg.fusion)?;
        save_cube(&cube, self.path("cubes/reconstructed"))?;

        let mut bands = Vec::new();
        let mut wins = 0;
        for (i, (sparse, interp)) in set.sparse_bands().iter().zip(&interpolated).enumerate() {
            let wn = sparse.wavenumber_cm1();
            let fused = cube.band(cube.find_band(wn, 0.0).expect("band kept by reconstruction"));
            let truth_band = truth
                .as_ref()
                .and_then(|t| t.cube.find_band(wn, 0.5).map(|j| t.cube.band(j)))
                .filter(|t| t.dims() == fused.dims());
            let mut panels = vec![interp, fused];
            let mut score = BandScore {
                wavenumber_cm1: wn,
                r: set.factor(i),
                mse_interpolated: None,
                mse_fused: None,
                ssim_interpolated: None,
                ssim_fused: None,
            };
            if let Some(t) = truth_band {
                panels.push(t);
                let (mi, mf) = (mse(interp, t)?, mse(fused, t)?);
                let (si, sf) = (ssim(t, interp, &self.cfg.ssim)?, ssim(t, fused, &self.cfg.ssim)?);
                if mf < mi && sf > si {
                    wins += 1;
                }
                score.mse_interpolated = Some(mi);
                score.mse_fused = Some(mf);
                score.ssim_interpolated = Some(si);
                score.ssim_fused = Some(sf);
            }
            export_triptych_png(&panels, self.path(&format!("plots/triptych_{wn:.0}.png")))?;
            bands.push(score);
        }
        let scored = bands.iter().filter(|b| b.mse_fused.is_some()).count();
        let report = ReconstructionReport {
            reference_wavenumber_cm1: reference.wavenumber_cm1(),
            width: reference.width(),
            height: reference.height(),
            curvelet_scales: scale_count(reference.width(), reference.height()),
            bands,
        };
        self.write_json("reports/reconstruction.json", &report)?;
        let mut lines = vec![format!(
            "reconstructed {} bands at {}x{} against {:.0} cm-1",
            set.sparse_bands().len(),
            report.width,
            report.height,
            report.reference_wavenumber_cm1
        )];
        if scored > 0 {
            let mean = |f: fn(&BandScore) -> Option<f64>| {
                report.bands.iter().filter_map(f).sum::<f64>() / scored as f64
            };
            lines.push(format!(
                "mean MSE interpolated {:.3e} fused {:.3e}; mean SSIM interpolated {:.4} fused {:.4}",
                mean(|b| b.mse_interpolated),
                mean(|b| b.mse_fused),
                mean(|b| b.ssim_interpolated),
                mean(|b| b.ssim_fused)
            ));
            lines.push(format!("fusion beats interpolation on both metrics for {wins}/{scored} bands"));
        }
        Ok(lines)
    }

    fn sweep(&self) -> Result<Vec<String>> {
        let full = self.full_data()?;
        let report = spacing_sweep(
            &full.cube,
            self.cfg.reference_wavenumber,
            &self.cfg.factors,
            &self.cfg.fusion,
            &self.cfg.ssim,
        )?;
        self.write_text("reports/sweep.csv", &report.to_csv())?;
        self.write_json("reports/sweep.json", &report)?;
        let (mse_svg, ssim_svg) = sweep_plots(&report);
        self.write_text("plots/sweep_mse.svg", &mse_svg)?;
        self.write_text("plots/sweep_ssim.svg", &ssim_svg)?;
        Ok(report
            .aggregates
            .iter()
            .map(|a| {
                format!(
                    "r={:<3} dy={:<5} um  MSE {:.3e} +/- {:.1e}  SSIM {:.4} +/- {:.4}",
                    a.r, a.dy_um, a.mse_mean, a.mse_std, a.ssim_mean, a.ssim_std
                )
            })
            .collect())
    }

    fn classify(&self) -> Result<Vec<String>> {
        let full = self.full_data()?;
        let labels = full
            .labels
            .as_ref()
            .ok_or_else(|| Error::Config("classification needs a label map".into()))?;
        let (w, h) = (full.cube.width(), full.cube.height());
        let (train_region, test_region) = (PixelRegion::left_half(w, h), PixelRegion::right_half(w, h));
        let cap = self.cfg.train.per_class_cap;
        let seed = self.cfg.seed;

        let train = build_dataset_in(&full.cube, labels, train_region, cap, seed)?;
        let model = train_rf(&train, &self.cfg.train)?;
        model.save(&self.path("models/forest.json"))?;

        let r = self.cfg.acquisition_factor;
        let set = build_acquisition_set(&full.cube, self.cfg.reference_wavenumber, r)?;
        let (recon, _) = reconstruct_set_detailed(&set, &self.cfg.fusion)?;

        let test_truth = build_dataset_in(&full.cube, labels, test_region, cap, seed)?;
        let test_recon = build_dataset_in(&recon, labels, test_region, cap, seed)?;
        let truth_eval = evaluate(&model, &test_truth)?;
        let recon_eval = evaluate(&model, &test_recon)?;

        self.write_text("reports/confusion_truth.csv", &truth_eval.confusion_csv())?;
        self.write_text("reports/confusion_reconstructed.csv", &recon_eval.confusion_csv())?;
        for class in TissueClass::ALL {
            let curves: Vec<(String, Vec<_>, f64)> = [("truth", &truth_eval), ("reconstructed", &recon_eval)]
                .into_iter()
                .filter_map(|(name, e)| {
                    let m = e.class(class.code())?;
                    Some((name.to_string(), m.roc.clone(), m.auc?))
                })
                .collect();
            let svg = roc_plot(&format!("{} one-vs-rest ROC", class.name()), &curves);
            self.write_text(&format!("plots/roc_{}.svg", class.name()), &svg)?;
        }
        export_label_png(labels, self.path("plots/classes_ground_truth.png"))?;
        let masked = |cube: &HyperCube| -> Result<LabelMap> {
            let predicted = classify_cube(&model, cube)?;
            let codes = predicted
                .labels()
                .iter()
                .zip(labels.labels())
                .map(|(&p, &t)| if t == 0 { 0 } else { p })
                .collect();
            LabelMap::new(w, h, codes)
        };
        export_label_png(&masked(&full.cube)?, self.path("plots/classes_truth_spectra.png"))?;
        export_label_png(&masked(&recon)?, self.path("plots/classes_reconstructed_spectra.png"))?;

        let report = ClassificationReport {
            r,
            train_region: "left half",
            test_region: "right half",
            train: TrainSummary {
                n_samples: train.len(),
                per_class_cap: cap,
                classes: model.classes.clone(),
                dropped_classes: train.dropped_classes().iter().map(|c| c.code()).collect(),
                oob_accuracy: model.oob_accuracy,
            },
            accuracy_gap: truth_eval.overall_accuracy - recon_eval.overall_accuracy,
            truth: truth_eval,
            reconstructed: recon_eval,
        };
        self.write_json("reports/metrics.json", &report)?;

        let mut lines = vec![format!(
            "trained {} trees on {} left-half pixels; tested on {} right-half pixels",
            model.trees.len(),
            report.train.n_samples,
            report.truth.n_samples
        )];
        for (name, e) in [("truth", &report.truth), (&*format!("r={r} reconstruction"), &report.reconstructed)] {
            let per: Vec<String> = e
                .per_class
                .iter()
                .map(|c| match c.auc {
                    Some(a) => format!("{} {:.3} (AUC {a:.3})", c.name, c.accuracy),
                    None => format!("{} {:.3}", c.name, c.accuracy),
                })
                .collect();
            lines.push(format!(
                "{name}: overall accuracy {:.4}; {}",
                e.overall_accuracy,
                per.join(", ")
            ));
        }
        Ok(lines)
    }
}

/// Checks that the configured input provides what `command` consumes.
fn check_input(cfg: &PipelineConfig, command: Command) -> Result<()> {
    let (full, labels) = match &cfg.input {
        InputSource::Phantom(_) => (true, true),
        InputSource::Cube { labels, .. } => (true, labels.is_some()),
        InputSource::Acquisition { truth, labels, .. } => (truth.is_some(), truth.is_some() && labels.is_some()),
    };
    let missing = match command {
        Command::Phantom if !matches!(cfg.input, InputSource::Phantom(_)) => Some("a phantom input"),
        Command::Acquire | Command::Sweep if !full => Some("a full-resolution cube"),
        Command::Classify if !labels => Some("a full-resolution cube with a label map"),
        _ => None,
    };
    match missing {
        Some(what) => Err(Error::Config(format!("`{command}` needs {what}"))),
        None => Ok(()),
    }
}

fn sweep_plots(report: &SweepReport) -> (String, String) {
    let series = |f: fn(&crate::evaluation::SweepAggregate) -> (f64, f64), name: &str| {
        let (points, errors): (Vec<_>, Vec<_>) = report
            .aggregates
            .iter()
            .map(|a| {
                let (m, s) = f(a);
                ((a.r as f64, m), s)
            })
            .unzip();
        Series::new(name, points).with_errors(errors)
    };
    let title = format!(
        "Reconstruction error vs row spacing (reference {:.0} cm-1)",
        report.reference_wavenumber_cm1
    );
    (
        line_plot(&title, "row factor r", "MSE", &[series(|a| (a.mse_mean, a.mse_std), "mean MSE")]),
        line_plot(
            &title,
            "row factor r",
            "SSIM",
            &[series(|a| (a.ssim_mean, a.ssim_std), "mean SSIM")],
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::ForestModel;

    fn small_config(out: &Path) -> PipelineConfig {
        let mut cfg = PipelineConfig::with_seed(3);
        cfg.input = InputSource::Phantom(PhantomInput {
            width: 64,
            height: 64,
            ..Default::default()
        });
        cfg.factors = vec![1, 4];
        cfg.acquisition_factor = 4;
        cfg.train.n_trees = 5;
        cfg.train.per_class_cap = 200;
        cfg.output_dir = Some(out.to_path_buf());
        cfg
    }

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
        }
        assert!("fuse".parse::<Command>().is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::InvalidParameter("x".into())), 2);
        assert_eq!(exit_code(&Error::InsufficientData("x".into())), 1);
    }

    #[test]
    fn input_requirements() {
        let mut cfg = PipelineConfig::with_seed(1);
        cfg.input = InputSource::Cube {
            path: "c".into(),
            labels: None,
        };
        assert!(check_input(&cfg, Command::Phantom).is_err());
        assert!(check_input(&cfg, Command::Classify).is_err());
        assert!(check_input(&cfg, Command::Sweep).is_ok());
        cfg.input = InputSource::Acquisition {
            reference: "a".into(),
            sparse: "b".into(),
            truth: None,
            labels: None,
        };
        assert!(check_input(&cfg, Command::Reconstruct).is_ok());
        assert!(check_input(&cfg, Command::Sweep).is_err());
    }

    #[test]
    fn pipeline_writes_every_artifact() {
        let dir = tempfile::tempdir().unwrap();
        let p = Pipeline::prepare(small_config(dir.path()), Command::Pipeline).unwrap();
        let lines = p.run(Command::Pipeline).unwrap();
        assert!(lines.iter().any(|l| l.starts_with("[classify]")));
        for f in [
            "reports/config.json",
            "cubes/phantom.json",
            "cubes/sparse.raw",
            "cubes/reconstructed.raw",
            "reports/acquisition.json",
            "reports/reconstruction.json",
            "reports/sweep.csv",
            "plots/sweep_ssim.svg",
            "reports/metrics.json",
            "reports/confusion_truth.csv",
            "plots/roc_necrosis.svg",
            "plots/classes_reconstructed_spectra.png",
            "models/forest.json",
            "plots/triptych_1746.png",
        ] {
            assert!(dir.path().join(f).exists(), "{f} missing");
        }
        let config = fs::read_to_string(dir.path().join("reports/config.json")).unwrap();
        assert!(!config.contains("output_dir"));
        ForestModel::load(&dir.path().join("models/forest.json")).unwrap();
    }

    #[test]
    fn reconstruct_from_saved_acquisition() {
        let dir = tempfile::tempdir().unwrap();
        let p = Pipeline::prepare(small_config(dir.path()), Command::Acquire).unwrap();
        p.run(Command::Acquire).unwrap();
        let mut cfg = small_config(&dir.path().join("second"));
        cfg.input = InputSource::Acquisition {
            reference: dir.path().join("cubes/reference"),
            sparse: dir.path().join("cubes/sparse"),
            truth: None,
            labels: None,
        };
        let q = Pipeline::prepare(cfg, Command::Reconstruct).unwrap();
        q.run(Command::Reconstruct).unwrap();
        let report = fs::read_to_string(dir.path().join("second/reports/reconstruction.json")).unwrap();
        assert!(!report.contains("mse_fused"));
        assert!(dir.path().join("second/plots/triptych_908.png").exists());
    }
}
