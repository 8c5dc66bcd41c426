//! Per-pixel spectral classification with a random forest.

mod evaluate;
mod forest;

pub use evaluate::{classify_cube, evaluate, ClassMetrics, Evaluation};
pub use forest::{predict, predict_proba, train_rf, ForestModel, Node, TrainConfig, Tree};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::{HyperCube, LabelMap, TissueClass};

/// Where a dataset row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Provenance {
    pub cube_id: u32,
    /// Row-major pixel index within the cube.
    pub pixel: usize,
}

/// Labeled per-pixel spectra, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelDataset {
    n_features: usize,
    features: Vec<f32>,
    labels: Vec<u8>,
    provenance: Vec<Provenance>,
    dropped_classes: Vec<TissueClass>,
}

impl PixelDataset {
    /// Dataset from raw rows; provenance records the row index.
    pub fn new(n_features: usize, features: Vec<f32>, labels: Vec<u8>) -> Result<Self> {
        if n_features == 0 || features.len() != n_features * labels.len() {
            return Err(Error::InvalidParameter(format!(
                "{} feature values do not form {} rows of {n_features}",
                features.len(),
                labels.len()
            )));
        }
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                band: i % n_features,
                index: i / n_features,
            });
        }
        if labels.contains(&0) {
            return Err(Error::InvalidParameter("dataset labels must be nonzero".into()));
        }
        let provenance = (0..labels.len())
            .map(|pixel| Provenance { cube_id: 0, pixel })
            .collect();
        Ok(Self {
            n_features,
            features,
            labels,
            provenance,
            dropped_classes: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn features(&self) -> &[f32] {
        &self.features
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    /// Tissue classes that had no labeled pixel in the sampled region.
    pub fn dropped_classes(&self) -> &[TissueClass] {
        &self.dropped_classes
    }

    /// Sorted distinct labels.
    pub fn classes(&self) -> Vec<u8> {
        let mut c = self.labels.clone();
        c.sort_unstable();
        c.dedup();
        c
    }

    pub fn set_cube_id(&mut self, cube_id: u32) {
        for p in &mut self.provenance {
            p.cube_id = cube_id;
        }
    }
}

/// Axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelRegion {
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

impl PixelRegion {
    pub fn full(width: usize, height: usize) -> Self {
        Self {
            x0: 0,
            y0: 0,
            width,
            height,
        }
    }

    /// Columns `0 .. width / 2`.
    pub fn left_half(width: usize, height: usize) -> Self {
        Self {
            x0: 0,
            y0: 0,
            width: width / 2,
            height,
        }
    }

    /// Columns `width / 2 .. width`.
    pub fn right_half(width: usize, height: usize) -> Self {
        Self {
            x0: width / 2,
            y0: 0,
            width: width - width / 2,
            height,
        }
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x0 && x < self.x0 + self.width && y >= self.y0 && y < self.y0 + self.height
    }
}

/// Class-balanced sample of labeled pixels over the whole cube.
pub fn build_dataset(cube: &HyperCube, labels: &LabelMap, cap: usize, seed: u64) -> Result<PixelDataset> {
    build_dataset_in(
        cube,
        labels,
        PixelRegion::full(cube.width(), cube.height()),
        cap,
        seed,
    )
}

/// Class-balanced sample of labeled pixels inside `region`.
///
/// Each class keeps at most `cap` pixels, drawn uniformly without
/// replacement from its own seeded stream. Rows are ordered by class code,
/// then pixel index. Classes without labeled pixels are listed in
/// [`PixelDataset::dropped_classes`].
pub fn build_dataset_in(
    cube: &HyperCube,
    labels: &LabelMap,
    region: PixelRegion,
    cap: usize,
    seed: u64,
) -> Result<PixelDataset> {
    let (w, h) = (cube.width(), cube.height());
    if (labels.width(), labels.height()) != (w, h) {
        return Err(Error::DimensionMismatch {
            expected: (w, h),
            actual: (labels.width(), labels.height()),
        });
    }
    if cap == 0 {
        return Err(Error::InvalidParameter("per-class cap must be at least 1".into()));
    }
    if region.x0 + region.width > w || region.y0 + region.height > h {
        return Err(Error::OutOfBounds(format!(
            "region {region:?} exceeds a {w}x{h} cube"
        )));
    }

    let mut per_class: [Vec<usize>; 4] = Default::default();
    for y in region.y0..region.y0 + region.height {
        for x in region.x0..region.x0 + region.width {
            let code = labels.get(x, y) as usize;
            if code != 0 {
                per_class[code].push(y * w + x);
            }
        }
    }
    if per_class.iter().all(Vec::is_empty) {
        return Err(Error::InsufficientData("no labeled pixels in region".into()));
    }

    let d = cube.len();
    let mut features = Vec::new();
    let mut out_labels = Vec::new();
    let mut provenance = Vec::new();
    let mut dropped_classes = Vec::new();
    for class in TissueClass::ALL {
        let code = class.code();
        let pixels = &per_class[code as usize];
        if pixels.is_empty() {
            dropped_classes.push(class);
            continue;
        }
        let chosen: Vec<usize> = if pixels.len() <= cap {
            pixels.clone()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(code as u64);
            let mut picks = index::sample(&mut rng, pixels.len(), cap).into_vec();
            picks.sort_unstable();
            picks.into_iter().map(|i| pixels[i]).collect()
        };
        for p in chosen {
            features.extend(cube.bands().iter().map(|b| b.pixels()[p]));
            out_labels.push(code);
            provenance.push(Provenance { cube_id: 0, pixel: p });
        }
    }
    if let Some(i) = features.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            band: i % d,
            index: provenance[i / d].pixel,
        });
    }
    Ok(PixelDataset {
        n_features: d,
        features,
        labels: out_labels,
        provenance,
        dropped_classes,
    })
}
