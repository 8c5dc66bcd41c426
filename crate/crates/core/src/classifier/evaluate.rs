use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{predict_proba, ForestModel, PixelDataset};
use crate::error::{Error, Result};
use crate::evaluation::{auc, roc_curve, RocPoint};
use crate::image::{HyperCube, LabelMap, TissueClass};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: u8,
    pub name: String,
    pub support: usize,
    /// Recall of the class.
    pub accuracy: f64,
    /// One-vs-rest AUC; `None` when the test set lacks positives or negatives.
    pub auc: Option<f64>,
    #[serde(skip)]
    pub roc: Vec<RocPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub n_samples: usize,
    /// Support-weighted mean of the per-class accuracies over classes the
    /// model was trained on.
    pub overall_accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    /// Class codes indexing the confusion matrix rows (truth) and columns
    /// (prediction): the model's classes followed by unseen test classes.
    pub confusion_classes: Vec<u8>,
    pub confusion: Vec<Vec<usize>>,
    /// Test classes absent from training, excluded from the overall accuracy.
    pub unseen_classes: Vec<u8>,
}

impl Evaluation {
    pub fn class(&self, code: u8) -> Option<&ClassMetrics> {
        self.per_class.iter().find(|c| c.class == code)
    }

    /// Confusion matrix as CSV with a `truth\predicted` header row.
    pub fn confusion_csv(&self) -> String {
        let name = |c: u8| {
            TissueClass::from_code(c)
                .map(|t| t.name().to_string())
                .unwrap_or_else(|| format!("class{c}"))
        };
        let mut out = String::from("truth\\predicted");
        for &c in &self.confusion_classes {
            out.push(',');
            out.push_str(&name(c));
        }
        out.push('\n');
        for (i, row) in self.confusion.iter().enumerate() {
            out.push_str(&name(self.confusion_classes[i]));
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Scores `model` on a labeled test set.
pub fn evaluate(model: &ForestModel, test: &PixelDataset) -> Result<Evaluation> {
    if test.is_empty() {
        return Err(Error::InsufficientData("test set is empty".into()));
    }
    let proba = predict_proba(model, test.features())?;
    let predicted: Vec<u8> = proba
        .iter()
        .map(|p| {
            let mut best = 0;
            for (i, &v) in p.iter().enumerate() {
                if v > p[best] {
                    best = i;
                }
            }
            model.classes[best]
        })
        .collect();

    let unseen_classes: Vec<u8> = test
        .classes()
        .into_iter()
        .filter(|c| !model.classes.contains(c))
        .collect();
    let mut confusion_classes = model.classes.clone();
    confusion_classes.extend(&unseen_classes);
    let pos = |c: u8| confusion_classes.iter().position(|&k| k == c).expect("listed");
    let k = confusion_classes.len();
    let mut confusion = vec![vec![0usize; k]; k];
    for (&t, &p) in test.labels().iter().zip(&predicted) {
        confusion[pos(t)][pos(p)] += 1;
    }

    let mut per_class = Vec::new();
    let (mut weighted, mut included) = (0.0, 0usize);
    for (ci, &class) in model.classes.iter().enumerate() {
        let support = test.labels().iter().filter(|&&l| l == class).count();
        if support == 0 {
            continue;
        }
        let accuracy = confusion[ci][ci] as f64 / support as f64;
        weighted += support as f64 * accuracy;
        included += support;
        let labels: Vec<bool> = test.labels().iter().map(|&l| l == class).collect();
        let scores: Vec<f64> = proba.iter().map(|p| p[ci]).collect();
        let (roc, auc) = match roc_curve(&scores, &labels) {
            Ok(points) => {
                let a = auc(&points)?;
                (points, Some(a))
            }
            Err(Error::InsufficientData(_)) => (Vec::new(), None),
            Err(e) => return Err(e),
        };
        per_class.push(ClassMetrics {
            class,
            name: TissueClass::from_code(class)
                .map(|t| t.name().to_string())
                .unwrap_or_else(|| format!("class{class}")),
            support,
            accuracy,
            auc,
            roc,
        });
    }
    if included == 0 {
        return Err(Error::InsufficientData(
            "no test sample belongs to a class seen in training".into(),
        ));
    }

    Ok(Evaluation {
        n_samples: test.len(),
        overall_accuracy: weighted / included as f64,
        per_class,
        confusion_classes,
        confusion,
        unseen_classes,
    })
}

/// Predicts a class for every pixel of `cube`.
pub fn classify_cube(model: &ForestModel, cube: &HyperCube) -> Result<LabelMap> {
    if cube.len() != model.n_features {
        return Err(Error::InvalidParameter(format!(
            "model expects {} bands, cube has {}",
            model.n_features,
            cube.len()
        )));
    }
    let (w, h) = (cube.width(), cube.height());
    let labels = (0..w * h)
        .into_par_iter()
        .map(|p| {
            let x: Vec<f32> = cube.bands().iter().map(|b| b.pixels()[p]).collect();
            model.predict_row(&x)
        })
        .collect::<Result<Vec<u8>>>()?;
    LabelMap::new(w, h, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{train_rf, TrainConfig};

    fn blocks() -> PixelDataset {
        let mut f = vec![];
        let mut l = vec![];
        for i in 0..60 {
            let class = (i % 3) as u8 + 1;
            f.extend([class as f32 * 10.0 + (i % 5) as f32 * 0.1, (i % 7) as f32]);
            l.push(class);
        }
        PixelDataset::new(2, f, l).unwrap()
    }

    fn model() -> ForestModel {
        train_rf(
            &blocks(),
            &TrainConfig {
                n_trees: 5,
                seed: 1,
                features_per_split: Some(2),
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn perfect_model_scores_one() {
        let e = evaluate(&model(), &blocks()).unwrap();
        assert_eq!(e.overall_accuracy, 1.0);
        assert!(e.per_class.iter().all(|c| c.accuracy == 1.0 && c.auc == Some(1.0)));
        assert_eq!(e.confusion[0], vec![20, 0, 0]);
        assert!(e.confusion_csv().starts_with("truth\\predicted,epithelium,stroma,necrosis\n"));
    }

    #[test]
    fn single_class_test_set() {
        let test = PixelDataset::new(2, vec![20.0, 1.0, 20.2, 3.0], vec![2, 2]).unwrap();
        let e = evaluate(&model(), &test).unwrap();
        assert_eq!(e.overall_accuracy, 1.0);
        assert_eq!(e.class(2).unwrap().auc, None);
    }

    #[test]
    fn unseen_class_is_reported_and_excluded() {
        let test = PixelDataset::new(2, vec![10.0, 0.0, 10.0, 0.0], vec![1, 3]).unwrap();
        let m = train_rf(
            &PixelDataset::new(2, vec![10.0, 0.0, 20.0, 0.0, 10.1, 1.0, 20.1, 1.0], vec![1, 2, 1, 2])
                .unwrap(),
            &TrainConfig {
                n_trees: 3,
                bootstrap: false,
                ..Default::default()
            },
        )
        .unwrap();
        let e = evaluate(&m, &test).unwrap();
        assert_eq!(e.unseen_classes, vec![3]);
        assert_eq!(e.overall_accuracy, 1.0);
        assert_eq!(e.confusion_classes, vec![1, 2, 3]);
        assert_eq!(e.confusion[2], vec![1, 0, 0]);
    }
}
