//! From-scratch binary classifiers over small dense matrices.
//!
//! Every model scores into `[0, 1]` and predicts positive when the score is
//! at least 0.5, so an exact 0.5 counts as positive.

mod bayes;
mod mlp;
mod svm;
mod tree;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng, Rng};

pub use bayes::GaussianNb;
pub use mlp::Mlp;
pub use svm::LinearSvm;
pub use tree::{AdaBoost, Forest, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    DecisionTree,
    NaiveBayes,
    Mlp,
    Svm,
    AdaBoost,
    RandomForest,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 6] = [
        ClassifierKind::DecisionTree,
        ClassifierKind::NaiveBayes,
        ClassifierKind::Mlp,
        ClassifierKind::Svm,
        ClassifierKind::AdaBoost,
        ClassifierKind::RandomForest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::DecisionTree => "decision_tree",
            ClassifierKind::NaiveBayes => "naive_bayes",
            ClassifierKind::Mlp => "mlp",
            ClassifierKind::Svm => "svm",
            ClassifierKind::AdaBoost => "adaboost",
            ClassifierKind::RandomForest => "random_forest",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown classifier `{s}`")))
    }
}

/// Named hyper-parameter values. Keys missing from a draw take the
/// learner's default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HyperparamDraw(pub BTreeMap<String, f64>);

impl HyperparamDraw {
    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.0.insert(key.to_string(), value);
        self
    }

    pub fn get_or(&self, key: &str, default: f64) -> f64 {
        self.0.get(key).copied().unwrap_or(default)
    }

    fn count_or(&self, key: &str, default: usize) -> Result<usize> {
        let v = self.get_or(key, default as f64);
        if !(v.is_finite() && v >= 1.0) {
            return Err(Error::InvalidArgument(format!("hyper-parameter `{key}` = {v} must be >= 1")));
        }
        Ok(v.round() as usize)
    }

    fn positive_or(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.get_or(key, default);
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidArgument(format!("hyper-parameter `{key}` = {v} must be > 0")));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    /// Integer uniform on the closed range.
    Integer,
    Uniform,
    LogUniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRange {
    pub name: String,
    pub low: f64,
    pub high: f64,
    pub scale: Scale,
}

impl ParamRange {
    fn new(name: &str, low: f64, high: f64, scale: Scale) -> Self {
        ParamRange {
            name: name.to_string(),
            low,
            high,
            scale,
        }
    }

    fn sample(&self, rng: &mut Rng) -> f64 {
        match self.scale {
            Scale::Integer => rng.gen_range(self.low as i64..=self.high as i64) as f64,
            Scale::Uniform => rng.gen_range(self.low..=self.high),
            Scale::LogUniform => rng.gen_range(self.low.ln()..=self.high.ln()).exp().clamp(self.low, self.high),
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        let in_range = self.low <= v && v <= self.high;
        match self.scale {
            Scale::Integer => in_range && v.fract() == 0.0,
            _ => in_range,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub kind: ClassifierKind,
    pub params: Vec<ParamRange>,
}

impl SearchSpace {
    pub fn dimensions(&self) -> usize {
        self.params.len()
    }

    pub fn sample(&self, rng: &mut Rng) -> HyperparamDraw {
        HyperparamDraw(self.params.iter().map(|p| (p.name.clone(), p.sample(rng))).collect())
    }

    pub fn contains(&self, draw: &HyperparamDraw) -> bool {
        self.params
            .iter()
            .all(|p| draw.0.get(&p.name).is_some_and(|&v| p.contains(v)))
    }
}

pub fn default_search_space(kind: ClassifierKind) -> SearchSpace {
    use Scale::*;
    let params = match kind {
        ClassifierKind::DecisionTree => vec![
            ParamRange::new("max_depth", 1.0, 20.0, Integer),
            ParamRange::new("min_samples_leaf", 1.0, 10.0, Integer),
        ],
        ClassifierKind::RandomForest => vec![
            ParamRange::new("n_trees", 10.0, 200.0, Integer),
            ParamRange::new("max_depth", 1.0, 20.0, Integer),
        ],
        ClassifierKind::Mlp => vec![
            ParamRange::new("hidden_units", 2.0, 64.0, Integer),
            ParamRange::new("learning_rate", 1e-4, 1e-1, LogUniform),
            ParamRange::new("epochs", 50.0, 500.0, Integer),
        ],
        ClassifierKind::Svm => vec![ParamRange::new("c", 1e-3, 1e3, LogUniform)],
        ClassifierKind::AdaBoost => vec![ParamRange::new("rounds", 10.0, 200.0, Integer)],
        ClassifierKind::NaiveBayes => vec![ParamRange::new("var_smoothing", 1e-12, 1e-6, LogUniform)],
    };
    SearchSpace { kind, params }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Model {
    Constant { score: f64 },
    Tree(Tree),
    Forest(Forest),
    AdaBoost(AdaBoost),
    NaiveBayes(GaussianNb),
    Svm(LinearSvm),
    Mlp(Mlp),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classifier {
    pub kind: ClassifierKind,
    pub hyperparams: HyperparamDraw,
    pub n_features: usize,
    /// Fraction of positive training labels.
    pub class_prior: f64,
    pub model: Model,
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    #[serde(flatten)]
    classifier: Classifier,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

impl Classifier {
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features {
            return Err(Error::Arity {
                expected: self.n_features,
                actual: x.len(),
            });
        }
        let s = match &self.model {
            Model::Constant { score } => *score,
            Model::Tree(t) => t.score(x),
            Model::Forest(f) => f.score(x),
            Model::AdaBoost(b) => b.score(x),
            Model::NaiveBayes(nb) => nb.score(x),
            Model::Svm(s) => s.score(x),
            Model::Mlp(m) => m.score(x),
        };
        debug_assert!((0.0..=1.0).contains(&s), "score {s} out of range");
        Ok(s.clamp(0.0, 1.0))
    }

    pub fn predict(&self, x: &[f64]) -> Result<bool> {
        Ok(self.score(x)? >= 0.5)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            classifier: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let probe: VersionProbe = serde_json::from_str(text)?;
        if probe.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelVersion {
                found: probe.format_version,
                expected: MODEL_FORMAT_VERSION,
            });
        }
        let file: ModelFile = serde_json::from_str(text)?;
        Ok(file.classifier)
    }
}

/// Checks shape and finiteness; returns the feature count.
pub fn validate_matrix(x: &[Vec<f64>], y: Option<&[bool]>) -> Result<usize> {
    if let Some(y) = y {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch(x.len(), y.len()));
        }
    }
    let Some(first) = x.first() else {
        return Err(Error::InvalidArgument("empty training matrix".into()));
    };
    let d = first.len();
    if d == 0 {
        return Err(Error::InvalidArgument("feature matrix has zero columns".into()));
    }
    for (row, xs) in x.iter().enumerate() {
        if xs.len() != d {
            return Err(Error::Arity {
                expected: d,
                actual: xs.len(),
            });
        }
        if let Some(col) = xs.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row, col });
        }
    }
    Ok(d)
}

pub fn fit(
    kind: ClassifierKind,
    x: &[Vec<f64>],
    y: &[bool],
    hp: &HyperparamDraw,
    seed: u64,
) -> Result<Classifier> {
    let d = validate_matrix(x, Some(y))?;
    let positives = y.iter().filter(|&&v| v).count();
    let class_prior = positives as f64 / y.len() as f64;
    let model = if positives == 0 || positives == y.len() {
        Model::Constant { score: class_prior }
    } else {
        let mut r = rng(derive_seed(seed, &["fit", kind.name()]));
        match kind {
            ClassifierKind::DecisionTree => Model::Tree(Tree::fit(
                x,
                y,
                None,
                &tree::TreeParams {
                    max_depth: hp.count_or("max_depth", 10)?,
                    min_samples_leaf: hp.count_or("min_samples_leaf", 1)?,
                    max_features: d,
                },
                &mut r,
            )),
            ClassifierKind::RandomForest => {
                let max_features = match hp.get_or("max_features", 0.0) {
                    v if v <= 0.0 => (d as f64).sqrt().ceil() as usize,
                    v => (v.round() as usize).clamp(1, d),
                };
                Model::Forest(Forest::fit(
                    x,
                    y,
                    hp.count_or("n_trees", 100)?,
                    &tree::TreeParams {
                        max_depth: hp.count_or("max_depth", 10)?,
                        min_samples_leaf: hp.count_or("min_samples_leaf", 1)?,
                        max_features,
                    },
                    hp.get_or("bootstrap", 1.0) != 0.0,
                    seed,
                ))
            }
            ClassifierKind::AdaBoost => Model::AdaBoost(AdaBoost::fit(x, y, hp.count_or("rounds", 50)?, &mut r)),
            ClassifierKind::NaiveBayes => Model::NaiveBayes(GaussianNb::fit(x, y, hp.positive_or("var_smoothing", 1e-9)?)),
            ClassifierKind::Svm => Model::Svm(LinearSvm::fit(x, y, hp.positive_or("c", 1.0)?, hp.count_or("epochs", 300)?)),
            ClassifierKind::Mlp => Model::Mlp(Mlp::fit(
                x,
                y,
                &mlp::MlpParams {
                    hidden_units: hp.count_or("hidden_units", 16)?,
                    learning_rate: hp.positive_or("learning_rate", 1e-2)?,
                    epochs: hp.count_or("epochs", 200)?,
                },
                &mut r,
            )),
        }
    };
    Ok(Classifier {
        kind,
        hyperparams: hp.clone(),
        n_features: d,
        class_prior,
        model,
    })
}

/// Per-column standardization used by the margin-based learners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let n = x.len() as f64;
        let d = x[0].len();
        let mut mean = vec![0.0; d];
        for row in x {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v / n;
            }
        }
        let mut scale = vec![0.0; d];
        for row in x {
            for j in 0..d {
                scale[j] += (row[j] - mean[j]).powi(2) / n;
            }
        }
        for s in &mut scale {
            // Constant columns map to zero.
            *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
        }
        Standardizer { mean, scale }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
pub(crate) mod testdata {
    use rand::Rng as _;

    use crate::seed::rng;

    /// Two Gaussian clusters whose centres are `sep` standard deviations apart.
    pub fn clusters(n: usize, d: usize, sep: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<bool>) {
        let mut r = rng(seed);
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let pos = i % 2 == 0;
            let centre = if pos { sep / 2.0 } else { -sep / 2.0 };
            let row = (0..d)
                .map(|_| {
                    let u1: f64 = r.gen_range(f64::EPSILON..1.0);
                    let u2: f64 = r.gen();
                    centre / (d as f64).sqrt() + (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
                })
                .collect();
            x.push(row);
            y.push(pos);
        }
        (x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::testdata::clusters;
    use super::*;

    fn accuracy(clf: &Classifier, x: &[Vec<f64>], y: &[bool]) -> f64 {
        let ok = x
            .iter()
            .zip(y)
            .filter(|(xi, &yi)| clf.predict(xi).unwrap() == yi)
            .count();
        ok as f64 / y.len() as f64
    }

    #[test]
    fn every_kind_separates_distant_clusters() {
        let (x, y) = clusters(200, 2, 10.0, 1);
        for kind in ClassifierKind::ALL {
            let clf = fit(kind, &x, &y, &HyperparamDraw::default(), 3).unwrap();
            assert!(accuracy(&clf, &x, &y) >= 0.95, "{kind}");
            let d = 10.0 / 2.0 / 2f64.sqrt();
            assert!(clf.score(&[d, d]).unwrap() > 0.5, "{kind}");
            assert!(clf.score(&[-d, -d]).unwrap() < 0.5, "{kind}");
        }
    }

    #[test]
    fn constant_labels_give_constant_scorer() {
        let (x, _) = clusters(20, 3, 4.0, 2);
        let y = vec![true; 20];
        for kind in ClassifierKind::ALL {
            let clf = fit(kind, &x, &y, &HyperparamDraw::default(), 0).unwrap();
            for xi in &x {
                assert!(clf.score(xi).unwrap() >= 0.5);
            }
        }
    }

    #[test]
    fn fitting_is_deterministic_and_scores_are_bounded() {
        let (x, y) = clusters(60, 4, 1.0, 5);
        let probe = clusters(30, 4, 6.0, 6).0;
        for kind in ClassifierKind::ALL {
            let a = fit(kind, &x, &y, &HyperparamDraw::default(), 11).unwrap();
            let b = fit(kind, &x, &y, &HyperparamDraw::default(), 11).unwrap();
            for p in &probe {
                let s = a.score(p).unwrap();
                assert!((0.0..=1.0).contains(&s));
                assert_eq!(s.to_bits(), b.score(p).unwrap().to_bits(), "{kind}");
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let y = vec![true, false];
        let hp = HyperparamDraw::default();
        assert!(matches!(
            fit(ClassifierKind::Svm, &[vec![0.0], vec![f64::NAN]], &y, &hp, 0),
            Err(Error::NonFinite { row: 1, col: 0 })
        ));
        assert!(fit(ClassifierKind::Svm, &[vec![], vec![]], &y, &hp, 0).is_err());
        let clf = fit(ClassifierKind::NaiveBayes, &[vec![0.0], vec![1.0]], &y, &hp, 0).unwrap();
        assert!(matches!(clf.score(&[1.0, 2.0]), Err(Error::Arity { expected: 1, actual: 2 })));
    }

    #[test]
    fn search_space_shapes_and_draws() {
        assert_eq!(default_search_space(ClassifierKind::NaiveBayes).dimensions(), 1);
        let (x, y) = clusters(40, 3, 3.0, 9);
        for kind in ClassifierKind::ALL {
            let space = default_search_space(kind);
            let mut r1 = rng(4);
            let mut r2 = rng(4);
            for i in 0..100 {
                let d1 = space.sample(&mut r1);
                assert_eq!(d1, space.sample(&mut r2));
                assert!(space.contains(&d1));
                // Fitting every draw would be slow for the big ensembles; a
                // few per kind is enough to check the range contract.
                if i < 3 {
                    fit(kind, &x, &y, &d1, i).unwrap();
                }
            }
        }
    }

    #[test]
    fn tree_kinds_ignore_positive_rescaling() {
        let (x, y) = clusters(80, 3, 2.0, 13);
        let scaled: Vec<Vec<f64>> = x.iter().map(|r| vec![r[0] * 37.5, r[1], r[2]]).collect();
        let probe = clusters(40, 3, 2.0, 14).0;
        for kind in [ClassifierKind::DecisionTree, ClassifierKind::RandomForest, ClassifierKind::AdaBoost] {
            let a = fit(kind, &x, &y, &HyperparamDraw::default(), 2).unwrap();
            let b = fit(kind, &scaled, &y, &HyperparamDraw::default(), 2).unwrap();
            for p in &probe {
                let q = vec![p[0] * 37.5, p[1], p[2]];
                assert_eq!(a.predict(p).unwrap(), b.predict(&q).unwrap(), "{kind}");
            }
        }
    }

    #[test]
    fn single_tree_forest_matches_decision_tree() {
        let (x, y) = clusters(100, 5, 1.5, 21);
        let hp = HyperparamDraw::default().with("max_depth", 6.0);
        let tree = fit(ClassifierKind::DecisionTree, &x, &y, &hp, 8).unwrap();
        let forest_hp = hp.clone().with("n_trees", 1.0).with("max_features", 5.0).with("bootstrap", 0.0);
        let forest = fit(ClassifierKind::RandomForest, &x, &y, &forest_hp, 8).unwrap();
        for p in &clusters(50, 5, 1.5, 22).0 {
            assert_eq!(tree.predict(p).unwrap(), forest.predict(p).unwrap());
        }
    }

    #[test]
    fn model_json_round_trips_and_checks_version() {
        let (x, y) = clusters(40, 2, 4.0, 3);
        for kind in ClassifierKind::ALL {
            let clf = fit(kind, &x, &y, &HyperparamDraw::default(), 1).unwrap();
            let text = clf.to_json().unwrap();
            assert_eq!(Classifier::from_json(&text).unwrap(), clf);
        }
        let clf = fit(ClassifierKind::Svm, &x, &y, &HyperparamDraw::default(), 1).unwrap();
        let bumped = clf.to_json().unwrap().replace("\"format_version\": 1", "\"format_version\": 2");
        assert!(matches!(Classifier::from_json(&bumped), Err(Error::ModelVersion { found: 2, .. })));
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in ClassifierKind::ALL {
            assert_eq!(kind.name().parse::<ClassifierKind>().unwrap(), kind);
        }
        assert!("knn".parse::<ClassifierKind>().is_err());
    }
}
