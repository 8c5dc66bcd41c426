use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::acquisition::{ClassSpec, PhantomSpec, TimeModel, REFERENCE_WAVENUMBER};
use crate::classifier::TrainConfig;
use crate::error::{Error, Result};
use crate::evaluation::SsimParams;
use crate::reconstruction::{Cutoff, FusionConfig};

/// Phantom parameters; omitted fields take the [`PhantomSpec::new`] defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomInput {
    pub width: usize,
    pub height: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pixel_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavenumbers: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<ClassSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background_level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub texture_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub texture_amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub core_radius_frac: Option<f64>,
}

impl Default for PhantomInput {
    fn default() -> Self {
        Self {
            width: 256,
            height: 256,
            pixel_um: None,
            wavenumbers: None,
            classes: None,
            background_level: None,
            noise_sigma: None,
            texture_scale: None,
            texture_amplitude: None,
            core_radius_frac: None,
        }
    }
}

impl PhantomInput {
    pub fn to_spec(&self, seed: u64) -> PhantomSpec {
        let mut spec = PhantomSpec::new(seed, self.width, self.height);
        if let Some(v) = self.pixel_um {
            spec.pixel_um = v;
        }
        if let Some(v) = &self.wavenumbers {
            spec.wavenumbers = v.clone();
        }
        if let Some(v) = &self.classes {
            spec.classes = v.clone();
        }
        if let Some(v) = self.background_level {
            spec.background_level = v;
        }
        if let Some(v) = self.noise_sigma {
            spec.noise_sigma = v;
        }
        if let Some(v) = self.texture_scale {
            spec.texture_scale = v;
        }
        if let Some(v) = self.texture_amplitude {
            spec.texture_amplitude = v;
        }
        if let Some(v) = self.core_radius_frac {
            spec.core_radius_frac = v;
        }
        spec
    }
}

/// Where the pipeline's data comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InputSource {
    /// A generated phantom with ground-truth labels.
    Phantom(PhantomInput),
    /// A full-resolution cube on disk, optionally with a label map.
    Cube {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<PathBuf>,
    },
    /// An already acquired set: a one-band full-resolution reference cube and
    /// a cube of row-decimated bands, optionally with the full-resolution
    /// truth and labels for scoring.
    Acquisition {
        reference: PathBuf,
        sparse: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        truth: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<PathBuf>,
    },
}

impl Default for InputSource {
    fn default() -> Self {
        InputSource::Phantom(PhantomInput::default())
    }
}

/// Scanned region used by the acquisition-time report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionConfig {
    pub region_width_um: f64,
    pub region_height_um: f64,
}

impl Default for RegionConfig {
    fn default() -> Self {
        Self {
            region_width_um: 1500.0,
            region_height_um: 1500.0,
        }
    }
}

/// One JSON document configuring every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    #[serde(default)]
    pub input: InputSource,
    #[serde(default = "default_reference")]
    pub reference_wavenumber: f64,
    /// Decimation factors for the spacing sweep.
    #[serde(default = "default_factors")]
    pub factors: Vec<usize>,
    /// Decimation factor for `acquire`, `reconstruct` and `classify`.
    #[serde(default = "default_acquisition_factor")]
    pub acquisition_factor: usize,
    #[serde(default)]
    pub sampling: RegionConfig,
    #[serde(default)]
    pub time_model: TimeModel,
    #[serde(default)]
    pub fusion: FusionConfig,
    #[serde(default)]
    pub ssim: SsimParams,
    #[serde(default)]
    pub train: TrainConfig,
    /// Not echoed into the outputs, so reports do not depend on where they
    /// are written.
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
}

fn default_reference() -> f64 {
    REFERENCE_WAVENUMBER
}

fn default_factors() -> Vec<usize> {
    vec![1, 2, 4, 6, 10, 20, 40]
}

fn default_acquisition_factor() -> usize {
    10
}

impl PipelineConfig {
    /// Default configuration on a generated phantom.
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            input: InputSource::default(),
            reference_wavenumber: default_reference(),
            factors: default_factors(),
            acquisition_factor: default_acquisition_factor(),
            sampling: RegionConfig::default(),
            time_model: TimeModel::default(),
            fusion: FusionConfig::default(),
            ssim: SsimParams::default(),
            train: TrainConfig::default(),
            output_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    /// Reads a config; relative input paths are resolved against the
    /// config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut self.input {
            InputSource::Phantom(_) => {}
            InputSource::Cube { path, labels } => {
                fix(path);
                labels.iter_mut().for_each(fix);
            }
            InputSource::Acquisition {
                reference,
                sparse,
                truth,
                labels,
            } => {
                fix(reference);
                fix(sparse);
                truth.iter_mut().for_each(fix);
                labels.iter_mut().for_each(fix);
            }
        }
        if let Some(out) = &mut self.output_dir {
            fix(out);
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Checks parameters and that every referenced input file exists.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.reference_wavenumber > 0.0 && self.reference_wavenumber.is_finite()) {
            return bad(format!(
                "reference_wavenumber must be positive, got {}",
                self.reference_wavenumber
            ));
        }
        if self.factors.is_empty() || self.factors.contains(&0) {
            return bad("factors must be a nonempty list of positive integers".into());
        }
        if self.acquisition_factor == 0 {
            return bad("acquisition_factor must be at least 1".into());
        }
        if !(self.sampling.region_width_um > 0.0 && self.sampling.region_height_um > 0.0) {
            return bad("sampling region must have positive extent".into());
        }
        self.time_model.validate()?;
        self.fusion.validate()?;
        self.ssim.validate()?;
        self.train.validate()?;
        let exists = |p: &Path| -> Result<()> {
            let json = p.with_extension("json");
            if p.exists() || json.exists() {
                Ok(())
            } else {
                Err(Error::Config(format!("input {} does not exist", p.display())))
            }
        };
        match &self.input {
            InputSource::Phantom(p) => {
                let spec = p.to_spec(self.seed);
                spec.validate()?;
                if !spec
                    .wavenumbers
                    .iter()
                    .any(|w| (w - self.reference_wavenumber).abs() <= 0.5)
                {
                    return bad(format!(
                        "reference wavenumber {} is not among the phantom bands",
                        self.reference_wavenumber
                    ));
                }
            }
            InputSource::Cube { path, labels } => {
                exists(path)?;
                if let Some(l) = labels {
                    exists(l)?;
                }
            }
            InputSource::Acquisition {
                reference,
                sparse,
                truth,
                labels,
            } => {
                exists(reference)?;
                exists(sparse)?;
                for p in truth.iter().chain(labels) {
                    exists(p)?;
                }
            }
        }
        Ok(())
    }
}

/// Command-line overrides applied on top of a loaded config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub factors: Option<Vec<usize>>,
    pub reference_wavenumber: Option<f64>,
    pub cutoff: Option<Cutoff>,
}

impl Overrides {
    /// Builds the effective config. A seed must come from either the config
    /// file or the overrides.
    pub fn apply(&self, base: Option<PipelineConfig>) -> Result<PipelineConfig> {
        let mut cfg = match (base, self.seed) {
            (Some(mut c), seed) => {
                if let Some(s) = seed {
                    c.seed = s;
                }
                c
            }
            (None, Some(s)) => PipelineConfig::with_seed(s),
            (None, None) => {
                return Err(Error::Config(
                    "a seed is required: pass --seed or a config with \"seed\"".into(),
                ))
            }
        };
        if let Some(out) = &self.output_dir {
            cfg.output_dir = Some(out.clone());
        }
        if let Some(f) = &self.factors {
            cfg.factors = f.clone();
        }
        if let Some(r) = self.reference_wavenumber {
            cfg.reference_wavenumber = r;
        }
        if let Some(c) = self.cutoff {
            cfg.fusion.cutoff_scale = c;
        }
        Ok(cfg)
    }
}
