//! Labeled synthetic tissue phantoms.
//!
//! A phantom is a tissue core on a bare substrate: a disk filled with the first
//! class and overlaid with irregular blobs per class, a per-class spectral
//! signature built from Gaussian absorption peaks, a smooth multiplicative
//! texture shared by all bands, and independent Gaussian noise per band.
//!
//! Randomness comes from ChaCha8 streams keyed by the seed: stream 0 drives the
//! geometry, stream 1 the texture and stream `2 + b` the noise of band `b`, so
//! bands can be generated in any order and still match bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{BandImage, HyperCube, LabelMap, TissueClass};

/// The 28 imaged wavenumbers in cm⁻¹, including the 1660 cm⁻¹ Amide I band.
pub const DEFAULT_WAVENUMBERS: [f64; 28] = [
    908.0, 974.0, 984.0, 1036.0, 1070.0, 1102.0, 1136.0, 1178.0, 1238.0, 1280.0, 1300.0, 1325.0,
    1358.0, 1396.0, 1420.0, 1456.0, 1482.0, 1500.0, 1536.0, 1556.0, 1596.0, 1610.0, 1660.0,
    1662.0, 1668.0, 1682.0, 1746.0, 1786.0,
];

/// Amide I, acquired at full resolution and used as the fusion reference.
pub const REFERENCE_WAVENUMBER: f64 = 1660.0;

const GEOMETRY_STREAM: u64 = 0;
const TEXTURE_STREAM: u64 = 1;
const NOISE_STREAM_BASE: u64 = 2;

/// Gaussian absorption peak; `width_cm1` is the standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPeak {
    pub center_cm1: f64,
    pub width_cm1: f64,
    pub amplitude: f64,
}

/// How many blobs a class paints and how large they are, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlobSpec {
    pub count: usize,
    pub min_radius_px: f64,
    pub max_radius_px: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub class: TissueClass,
    pub baseline: f64,
    pub peaks: Vec<SpectralPeak>,
    pub blobs: BlobSpec,
}

impl ClassSpec {
    /// Noiseless, untextured spectrum sampled at `wavenumbers`.
    pub fn signature(&self, wavenumbers: &[f64]) -> Vec<f64> {
        wavenumbers
            .iter()
            .map(|&nu| {
                self.baseline
                    + self
                        .peaks
                        .iter()
                        .map(|p| {
                            let z = (nu - p.center_cm1) / p.width_cm1;
                            p.amplitude * (-0.5 * z * z).exp()
                        })
                        .sum::<f64>()
            })
            .collect()
    }
}

fn peak(center_cm1: f64, width_cm1: f64, amplitude: f64) -> SpectralPeak {
    SpectralPeak {
        center_cm1,
        width_cm1,
        amplitude,
    }
}

/// Stroma, epithelium and necrosis. Every class absorbs at the same protein,
/// nucleic-acid, collagen and lipid bands; the classes differ in the peak
/// weights. Blob radii scale with `size_px`, the smaller image side. Classes
/// are painted in list order.
pub fn default_class_specs(size_px: usize) -> Vec<ClassSpec> {
    let s = size_px as f64;
    let tissue = |w: [f64; 8]| {
        vec![
            peak(1660.0, 22.0, w[0]),
            peak(1548.0, 20.0, w[1]),
            peak(1456.0, 15.0, w[2]),
            peak(1338.0, 12.0, w[3]),
            peak(1238.0, 18.0, w[4]),
            peak(1080.0, 20.0, w[5]),
            peak(1032.0, 25.0, w[6]),
            peak(1740.0, 15.0, w[7]),
        ]
    };
    vec![
        ClassSpec {
            class: TissueClass::Stroma,
            baseline: 0.06,
            peaks: tissue([0.85, 0.55, 0.18, 0.22, 0.30, 0.12, 0.20, 0.03]),
            blobs: BlobSpec {
                count: 6,
                min_radius_px: 0.16 * s,
                max_radius_px: 0.30 * s,
            },
        },
        ClassSpec {
            class: TissueClass::Epithelium,
            baseline: 0.05,
            peaks: tissue([0.75, 0.50, 0.16, 0.06, 0.38, 0.32, 0.10, 0.04]),
            blobs: BlobSpec {
                count: 12,
                min_radius_px: 0.04 * s,
                max_radius_px: 0.10 * s,
            },
        },
        ClassSpec {
            class: TissueClass::Necrosis,
            baseline: 0.04,
            peaks: tissue([0.50, 0.30, 0.20, 0.05, 0.20, 0.12, 0.08, 0.22]),
            blobs: BlobSpec {
                count: 4,
                min_radius_px: 0.04 * s,
                max_radius_px: 0.08 * s,
            },
        },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    #[serde(default = "default_pixel_um")]
    pub pixel_um: f64,
    #[serde(default = "default_wavenumbers")]
    pub wavenumbers: Vec<f64>,
    pub classes: Vec<ClassSpec>,
    #[serde(default = "default_background")]
    pub background_level: f64,
    #[serde(default)]
    pub noise_sigma: f64,
    /// Correlation length of the multiplicative texture in pixels; 0 disables it.
    #[serde(default)]
    pub texture_scale: f64,
    /// Standard deviation of the texture around 1.
    #[serde(default)]
    pub texture_amplitude: f64,
    /// Radius of the centered tissue core as a fraction of the smaller side.
    /// Inside the core, pixels not covered by a blob take the first class;
    /// outside it lies bare substrate. 0 spreads blobs over the whole field.
    #[serde(default)]
    pub core_radius_frac: f64,
}

fn default_pixel_um() -> f64 {
    0.5
}

fn default_wavenumbers() -> Vec<f64> {
    DEFAULT_WAVENUMBERS.to_vec()
}

fn default_background() -> f64 {
    0.02
}

impl PhantomSpec {
    /// The default three-class phantom over the 28 standard wavenumbers.
    pub fn new(seed: u64, width: usize, height: usize) -> Self {
        Self {
            seed,
            width,
            height,
            pixel_um: default_pixel_um(),
            wavenumbers: default_wavenumbers(),
            classes: default_class_specs(width.min(height)),
            background_level: default_background(),
            noise_sigma: 0.01,
            texture_scale: 3.0,
            texture_amplitude: 0.1,
            core_radius_frac: 0.45,
        }
    }

    /// Drops noise and texture, leaving piecewise-constant spectra.
    pub fn noiseless(mut self) -> Self {
        self.noise_sigma = 0.0;
        self.texture_scale = 0.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.width == 0 || self.height == 0 {
            return bad(format!("phantom area is zero ({}x{})", self.width, self.height));
        }
        if self.classes.is_empty() {
            return bad("phantom needs at least one class".into());
        }
        if !(self.pixel_um > 0.0 && self.pixel_um.is_finite()) {
            return bad(format!("pixel size must be positive, got {}", self.pixel_um));
        }
        if self.wavenumbers.is_empty()
            || self.wavenumbers[0] <= 0.0
            || self.wavenumbers.windows(2).any(|w| w[1] <= w[0])
        {
            return bad("wavenumbers must be positive and strictly increasing".into());
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad(format!("noise_sigma must be >= 0, got {}", self.noise_sigma));
        }
        if !(self.texture_scale >= 0.0 && self.texture_scale.is_finite()) {
            return bad(format!("texture_scale must be >= 0, got {}", self.texture_scale));
        }
        if !(0.0..0.3).contains(&self.texture_amplitude) {
            return bad(format!(
                "texture_amplitude must lie in [0, 0.3), got {}",
                self.texture_amplitude
            ));
        }
        if !(0.0..=1.0).contains(&self.core_radius_frac) {
            return bad(format!(
                "core_radius_frac must lie in [0, 1], got {}",
                self.core_radius_frac
            ));
        }
        if !(self.background_level >= 0.0 && self.background_level.is_finite()) {
            return bad("background_level must be >= 0".into());
        }
        for (i, c) in self.classes.iter().enumerate() {
            if self.classes[..i].iter().any(|o| o.class == c.class) {
                return bad(format!("class {} listed twice", c.class.name()));
            }
            let b = &c.blobs;
            if b.count == 0 || !(b.min_radius_px > 0.0 && b.min_radius_px <= b.max_radius_px) {
                return bad(format!("invalid blob spec for {}", c.class.name()));
            }
            if c.peaks.iter().any(|p| !(p.width_cm1 > 0.0)) {
                return bad(format!("peak widths must be positive for {}", c.class.name()));
            }
        }
        let sigs: Vec<Vec<f64>> = self
            .classes
            .iter()
            .map(|c| c.signature(&self.wavenumbers))
            .collect();
        for i in 0..sigs.len() {
            for j in 0..i {
                if sigs[i] == sigs[j] {
                    return bad(format!(
                        "classes {} and {} have identical signatures",
                        self.classes[i].class.name(),
                        self.classes[j].class.name()
                    ));
                }
            }
        }
        Ok(())
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

struct Blob {
    cx: f64,
    cy: f64,
    radius: f64,
    aspect: f64,
    cos_t: f64,
    sin_t: f64,
    harmonics: [(f64, f64); 2],
}

impl Blob {
    fn sample(rng: &mut ChaCha8Rng, spec: &BlobSpec, region: &Region) -> Self {
        let theta: f64 = rng.random_range(0.0..std::f64::consts::PI);
        let (cx, cy) = region.sample_point(rng);
        Blob {
            cx,
            cy,
            radius: if spec.max_radius_px > spec.min_radius_px {
                rng.random_range(spec.min_radius_px..spec.max_radius_px)
            } else {
                spec.min_radius_px
            },
            aspect: rng.random_range(0.6..1.0),
            cos_t: theta.cos(),
            sin_t: theta.sin(),
            harmonics: [
                (rng.random_range(0.0..0.15), rng.random_range(0.0..6.3)),
                (rng.random_range(0.0..0.08), rng.random_range(0.0..6.3)),
            ],
        }
    }

    fn paint(&self, labels: &mut [u8], region: &Region, code: u8) {
        let (width, height) = (region.width, region.height);
        let reach = self.radius * 1.25;
        let x0 = (self.cx - reach).floor().max(0.0) as usize;
        let y0 = (self.cy - reach).floor().max(0.0) as usize;
        let x1 = ((self.cx + reach).ceil() as usize).min(width - 1);
        let y1 = ((self.cy + reach).ceil() as usize).min(height - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let dx = x as f64 - self.cx;
                let dy = y as f64 - self.cy;
                let u = (dx * self.cos_t + dy * self.sin_t) / self.radius;
                let v = (-dx * self.sin_t + dy * self.cos_t) / (self.radius * self.aspect);
                let phi = v.atan2(u);
                let edge = 1.0
                    + self.harmonics[0].0 * (3.0 * phi + self.harmonics[0].1).sin()
                    + self.harmonics[1].0 * (5.0 * phi + self.harmonics[1].1).sin();
                if (u * u + v * v).sqrt() <= edge && region.contains(x, y) {
                    labels[y * width + x] = code;
                }
            }
        }
    }
}

/// Where tissue may lie: the whole field or a centered disk.
struct Region {
    width: usize,
    height: usize,
    core_radius: Option<f64>,
}

impl Region {
    fn new(spec: &PhantomSpec) -> Self {
        let r = spec.core_radius_frac * spec.width.min(spec.height) as f64;
        Region {
            width: spec.width,
            height: spec.height,
            core_radius: (spec.core_radius_frac > 0.0).then_some(r.max(0.5)),
        }
    }

    fn center(&self) -> (f64, f64) {
        ((self.width as f64 - 1.0) / 2.0, (self.height as f64 - 1.0) / 2.0)
    }

    fn contains(&self, x: usize, y: usize) -> bool {
        match self.core_radius {
            None => true,
            Some(r) => {
                let (cx, cy) = self.center();
                (x as f64 - cx).hypot(y as f64 - cy) <= r
            }
        }
    }

    fn sample_point(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        match self.core_radius {
            None => (
                rng.random_range(0.0..self.width as f64),
                rng.random_range(0.0..self.height as f64),
            ),
            Some(r) => {
                let (cx, cy) = self.center();
                let rho = r * rng.random_range(0.0f64..1.0).sqrt();
                let phi = rng.random_range(0.0..std::f64::consts::TAU);
                let x = (cx + rho * phi.cos()).round().clamp(0.0, self.width as f64 - 1.0);
                let y = (cy + rho * phi.sin()).round().clamp(0.0, self.height as f64 - 1.0);
                (x, y)
            }
        }
    }
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil().max(1.0) as isize;
    let k: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.into_iter().map(|v| v / sum).collect()
}

fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let mut i = i;
    while i < 0 || i >= n {
        i = if i < 0 { -i - 1 } else { 2 * n - i - 1 };
    }
    i as usize
}

/// Smooth multiplicative field with mean ~1 and standard deviation `amplitude`.
fn texture_field(spec: &PhantomSpec) -> Vec<f64> {
    let (w, h) = (spec.width, spec.height);
    if spec.texture_scale == 0.0 || spec.texture_amplitude == 0.0 {
        return vec![1.0; w * h];
    }
    let mut rng = spec.rng(TEXTURE_STREAM);
    let white: Vec<f64> = (0..w * h).map(|_| rng.sample(StandardNormal)).collect();
    let kernel = gaussian_kernel(spec.texture_scale);
    let r = (kernel.len() / 2) as isize;

    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            tmp[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, &g)| g * white[y * w + reflect(x as isize + k as isize - r, w)])
                .sum();
        }
    }
    let mut field = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            field[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, &g)| g * tmp[reflect(y as isize + k as isize - r, h) * w + x])
                .sum();
        }
    }
    let n = field.len() as f64;
    let mean = field.iter().sum::<f64>() / n;
    let std = (field.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let std = if std > 0.0 { std } else { 1.0 };
    field
        .into_iter()
        .map(|v| 1.0 + spec.texture_amplitude * ((v - mean) / std).clamp(-3.0, 3.0))
        .collect()
}

fn paint_labels(spec: &PhantomSpec) -> Vec<u8> {
    let (w, h) = (spec.width, spec.height);
    let region = Region::new(spec);
    let mut rng = spec.rng(GEOMETRY_STREAM);
    let blobs: Vec<Vec<Blob>> = spec
        .classes
        .iter()
        .map(|c| {
            (0..c.blobs.count)
                .map(|_| Blob::sample(&mut rng, &c.blobs, &region))
                .collect()
        })
        .collect();

    let mut labels = vec![0u8; w * h];
    if region.core_radius.is_some() {
        let fill = spec.classes[0].class.code();
        for y in 0..h {
            for x in 0..w {
                if region.contains(x, y) {
                    labels[y * w + x] = fill;
                }
            }
        }
    }
    for (c, class_blobs) in spec.classes.iter().zip(&blobs) {
        for blob in class_blobs {
            blob.paint(&mut labels, &region, c.class.code());
        }
    }
    // A class buried under later classes gets its first blob repainted on top.
    for (c, class_blobs) in spec.classes.iter().zip(&blobs) {
        let code = c.class.code();
        if !labels.contains(&code) {
            class_blobs[0].paint(&mut labels, &region, code);
            let cx = (class_blobs[0].cx as usize).min(w - 1);
            let cy = (class_blobs[0].cy as usize).min(h - 1);
            labels[cy * w + cx] = code;
        }
    }
    labels
}

/// Generates the phantom cube and its ground-truth label map.
pub fn generate_phantom(spec: &PhantomSpec) -> Result<(HyperCube, LabelMap)> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let labels = paint_labels(spec);
    let texture = texture_field(spec);

    let mut signatures: [Option<Vec<f64>>; 4] = Default::default();
    for c in &spec.classes {
        signatures[c.class.code() as usize] = Some(c.signature(&spec.wavenumbers));
    }

    let bands = spec
        .wavenumbers
        .par_iter()
        .enumerate()
        .map(|(b, &nu)| {
            let mut rng = spec.rng(NOISE_STREAM_BASE + b as u64);
            let pixels = labels
                .iter()
                .zip(&texture)
                .map(|(&code, &t)| {
                    let clean = match &signatures[code as usize] {
                        Some(sig) => sig[b] * t,
                        None => spec.background_level,
                    };
                    let noise = if spec.noise_sigma > 0.0 {
                        spec.noise_sigma * rng.sample::<f64, _>(StandardNormal)
                    } else {
                        0.0
                    };
                    (clean + noise) as f32
                })
                .collect();
            BandImage::new(w, h, spec.pixel_um, spec.pixel_um, nu, pixels)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok((HyperCube::new(bands)?, LabelMap::new(w, h, labels)?))
}
