use std::path::Path;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PixelDataset;
use crate::error::{Error, Result};

const FORMAT: &str = "sparsefuse-forest";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub n_trees: usize,
    /// `None` grows trees until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// `None` uses `floor(sqrt(n_features))`.
    pub features_per_split: Option<usize>,
    pub per_class_cap: usize,
    /// Grow each tree on a bootstrap resample of the training set.
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            features_per_split: None,
            per_class_cap: 10_000,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 || self.per_class_cap == 0 || self.min_samples_leaf == 0 {
            return Err(Error::InvalidParameter(
                "n_trees, per_class_cap and min_samples_leaf must be at least 1".into(),
            ));
        }
        if self.features_per_split == Some(0) {
            return Err(Error::InvalidParameter(
                "features_per_split must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Tree node. Children always sit after their parent in the node list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    /// Samples with `x[feature] < threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Training samples per class, indexed like [`ForestModel::classes`].
    Leaf { counts: Vec<u32> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    /// Node 0 is the root.
    pub nodes: Vec<Node>,
}

impl Tree {
    fn leaf(&self, x: &[f32]) -> &[u32] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if (x[*feature] as f64) < *threshold { *left } else { *right },
                Node::Leaf { counts } => return counts,
            }
        }
    }

    /// Index into the class list of this tree's vote for `x`.
    fn vote(&self, x: &[f32]) -> usize {
        argmax(self.leaf(x).iter().map(|&c| c as f64))
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }
}

/// First index of the maximum.
fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub format: String,
    pub version: u32,
    /// Sorted class codes; leaf counts and probabilities follow this order.
    pub classes: Vec<u8>,
    pub n_features: usize,
    pub features_per_split: usize,
    pub train_seed: u64,
    /// Fraction of training samples whose out-of-bag majority vote is
    /// correct; `None` without bootstrap or when no sample was out of bag.
    pub oob_accuracy: Option<f64>,
    pub trees: Vec<Tree>,
}

struct Grower<'a> {
    data: &'a PixelDataset,
    class_idx: Vec<usize>,
    n_classes: usize,
    cfg: &'a TrainConfig,
    mtry: usize,
}

struct Best {
    score: f64,
    feature: usize,
    threshold: f64,
}

impl Grower<'_> {
    fn counts(&self, samples: &[u32]) -> Vec<u32> {
        let mut c = vec![0u32; self.n_classes];
        for &s in samples {
            c[self.class_idx[s as usize]] += 1;
        }
        c
    }

    /// Best split by Gini decrease over `mtry` randomly drawn features.
    ///
    /// Within a draw, features and thresholds are scanned in increasing order
    /// and only strict improvements are kept, so ties go to the lowest
    /// feature, then threshold. When no drawn feature improves on the parent,
    /// further features are drawn until one does or all have been tried.
    fn best_split(&self, samples: &[u32], counts: &[u32], rng: &mut ChaCha8Rng) -> Option<Best> {
        let d = self.data.n_features();
        let order = index::sample(rng, d, d).into_vec();
        for chunk in order.chunks(self.mtry) {
            let mut features = chunk.to_vec();
            features.sort_unstable();
            if let Some(best) = self.best_split_among(samples, counts, &features) {
                return Some(best);
            }
        }
        None
    }

    fn best_split_among(&self, samples: &[u32], counts: &[u32], features: &[usize]) -> Option<Best> {
        let n = samples.len() as f64;
        // Maximizing sum_c(n_c^2 / n) over both children minimizes the
        // weighted Gini impurity.
        let parent: f64 = counts.iter().map(|&c| (c as f64).powi(2)).sum::<f64>() / n;
        let mut best: Option<Best> = None;
        let min_leaf = self.cfg.min_samples_leaf;
        let mut pairs: Vec<(f32, usize)> = Vec::with_capacity(samples.len());
        for &f in features {
            pairs.clear();
            pairs.extend(
                samples
                    .iter()
                    .map(|&s| (self.data.row(s as usize)[f], self.class_idx[s as usize])),
            );
            pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            let mut left = vec![0u32; self.n_classes];
            let mut right = counts.to_vec();
            let (mut sl, mut sr) = (0.0f64, counts.iter().map(|&c| (c as f64).powi(2)).sum::<f64>());
            for i in 0..pairs.len() - 1 {
                let c = pairs[i].1;
                // Running sums of squared counts.
                sl += 2.0 * left[c] as f64 + 1.0;
                sr -= 2.0 * right[c] as f64 - 1.0;
                left[c] += 1;
                right[c] -= 1;
                let (v, next) = (pairs[i].0, pairs[i + 1].0);
                if v == next {
                    continue;
                }
                let nl = i + 1;
                let nr = pairs.len() - nl;
                if nl < min_leaf || nr < min_leaf {
                    continue;
                }
                let score = sl / nl as f64 + sr / nr as f64;
                if score > parent * (1.0 + 1e-12) && best.as_ref().is_none_or(|b| score > b.score) {
                    best = Some(Best {
                        score,
                        feature: f,
                        threshold: (v as f64 + next as f64) / 2.0,
                    });
                }
            }
        }
        best
    }

    fn grow(&self, samples: Vec<u32>, rng: &mut ChaCha8Rng) -> Tree {
        let mut nodes = Vec::new();
        // (node slot, samples, depth)
        let mut stack = vec![(0usize, samples, 0usize)];
        nodes.push(Node::Leaf { counts: vec![] });
        while let Some((slot, samples, depth)) = stack.pop() {
            let counts = self.counts(&samples);
            let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
            let depth_ok = self.cfg.max_depth.is_none_or(|m| depth < m);
            let split = if pure || !depth_ok || samples.len() < self.cfg.min_samples_split.max(2) {
                None
            } else {
                self.best_split(&samples, &counts, rng)
            };
            match split {
                None => nodes[slot] = Node::Leaf { counts },
                Some(b) => {
                    let (l, r): (Vec<u32>, Vec<u32>) = samples
                        .iter()
                        .partition(|&&s| (self.data.row(s as usize)[b.feature] as f64) < b.threshold);
                    let left = nodes.len();
                    let right = left + 1;
                    nodes.push(Node::Leaf { counts: vec![] });
                    nodes.push(Node::Leaf { counts: vec![] });
                    nodes[slot] = Node::Split {
                        feature: b.feature,
                        threshold: b.threshold,
                        left,
                        right,
                    };
                    // Left subtree is grown first so RNG use follows preorder.
                    stack.push((right, r, depth + 1));
                    stack.push((left, l, depth + 1));
                }
            }
        }
        Tree { nodes }
    }
}

/// Trains a random forest of CART trees.
///
/// Tree `t` draws from ChaCha8 stream `t` of `cfg.seed`, so the forest does
/// not depend on how trees are scheduled across threads.
pub fn train_rf(data: &PixelDataset, cfg: &TrainConfig) -> Result<ForestModel> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::InsufficientData("training set is empty".into()));
    }
    let classes = data.classes();
    if classes.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "training needs at least two classes, found {classes:?}"
        )));
    }
    let d = data.n_features();
    let mtry = cfg
        .features_per_split
        .unwrap_or(((d as f64).sqrt().floor() as usize).max(1))
        .min(d);
    let class_idx: Vec<usize> = data
        .labels()
        .iter()
        .map(|l| classes.binary_search(l).expect("label listed in classes"))
        .collect();
    let grower = Grower {
        data,
        class_idx,
        n_classes: classes.len(),
        cfg,
        mtry,
    };
    let n = data.len();

    let grown: Vec<(Tree, Vec<bool>)> = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(t as u64);
            let mut in_bag = vec![!cfg.bootstrap; n];
            let samples: Vec<u32> = if cfg.bootstrap {
                (0..n)
                    .map(|_| {
                        let s = rng.random_range(0..n);
                        in_bag[s] = true;
                        s as u32
                    })
                    .collect()
            } else {
                (0..n as u32).collect()
            };
            (grower.grow(samples, &mut rng), in_bag)
        })
        .collect();

    let oob_accuracy = cfg.bootstrap.then(|| {
        let mut votes = vec![vec![0u32; classes.len()]; n];
        for (tree, in_bag) in &grown {
            for i in (0..n).filter(|&i| !in_bag[i]) {
                votes[i][tree.vote(data.row(i))] += 1;
            }
        }
        let (mut seen, mut correct) = (0usize, 0usize);
        for (i, v) in votes.iter().enumerate() {
            if v.iter().any(|&c| c > 0) {
                seen += 1;
                if argmax(v.iter().map(|&c| c as f64)) == grower.class_idx[i] {
                    correct += 1;
                }
            }
        }
        (seen > 0).then(|| correct as f64 / seen as f64)
    });

    Ok(ForestModel {
        format: FORMAT.into(),
        version: VERSION,
        classes,
        n_features: d,
        features_per_split: mtry,
        train_seed: cfg.seed,
        oob_accuracy: oob_accuracy.flatten(),
        trees: grown.into_iter().map(|(t, _)| t).collect(),
    })
}

impl ForestModel {
    fn check_width(&self, width: usize) -> Result<()> {
        if width != self.n_features {
            return Err(Error::InvalidParameter(format!(
                "model expects {} features, got {width}",
                self.n_features
            )));
        }
        Ok(())
    }

    /// Fraction of trees voting for each class in [`ForestModel::classes`].
    pub fn predict_proba_row(&self, x: &[f32]) -> Result<Vec<f64>> {
        self.check_width(x.len())?;
        let mut votes = vec![0u32; self.classes.len()];
        for t in &self.trees {
            votes[t.vote(x)] += 1;
        }
        let n = self.trees.len() as f64;
        Ok(votes.into_iter().map(|v| v as f64 / n).collect())
    }

    /// Class with the most votes; ties go to the lowest class code.
    pub fn predict_row(&self, x: &[f32]) -> Result<u8> {
        let p = self.predict_proba_row(x)?;
        Ok(self.classes[argmax(p.into_iter())])
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: ForestModel = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Structural checks for a deserialized model.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("invalid forest model: {m}")));
        if self.format != FORMAT || self.version != VERSION {
            return bad(format!("unsupported format {} v{}", self.format, self.version));
        }
        if self.classes.len() < 2 || self.classes.windows(2).any(|w| w[0] >= w[1]) {
            return bad("classes must be at least two sorted distinct codes".into());
        }
        if self.trees.is_empty() {
            return bad("no trees".into());
        }
        for (t, tree) in self.trees.iter().enumerate() {
            if tree.nodes.is_empty() {
                return bad(format!("tree {t} has no nodes"));
            }
            for (i, node) in tree.nodes.iter().enumerate() {
                match node {
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => {
                        let ok = *feature < self.n_features
                            && threshold.is_finite()
                            && *left > i
                            && *right > i
                            && *left < tree.nodes.len()
                            && *right < tree.nodes.len();
                        if !ok {
                            return bad(format!("tree {t} node {i} is malformed"));
                        }
                    }
                    Node::Leaf { counts } => {
                        if counts.len() != self.classes.len() {
                            return bad(format!("tree {t} leaf {i} has wrong class count"));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Per-row class probabilities for a row-major feature matrix.
pub fn predict_proba(model: &ForestModel, features: &[f32]) -> Result<Vec<Vec<f64>>> {
    let d = model.n_features;
    if !features.len().is_multiple_of(d) {
        return Err(Error::InvalidParameter(format!(
            "{} values do not form rows of {d} features",
            features.len()
        )));
    }
    features
        .par_chunks(d)
        .map(|x| model.predict_proba_row(x))
        .collect()
}

/// Per-row predicted class codes for a row-major feature matrix.
pub fn predict(model: &ForestModel, features: &[f32]) -> Result<Vec<u8>> {
    Ok(predict_proba(model, features)?
        .into_iter()
        .map(|p| model.classes[argmax(p.into_iter())])
        .collect())
}
