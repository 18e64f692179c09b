//! Training methodology: feature selection, scaling, balancing,
//! hyper-parameter search and validation.
//!
//! Every statistic a fold uses for preprocessing comes from its training
//! split. Seeds for a fold derive from the master seed, the fold id and the
//! configuration id, so parallel and sequential runs agree bit for bit.

mod ablation;
mod balance;
mod folds;
mod search;
mod select;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use ablation::{ablation, default_grid, AblationEntry, AblationTable, RankedConfig, SmellRanking};
pub use balance::{
    balance, balance_with_k, distance, nearest, Balanced, Balancing, MinMaxScaler, Synthetic, NEAR_MISS_K, SMOTE_K,
};
pub use folds::{stratified_folds, training_rows};
pub use search::{random_search, SearchOutcome, SearchSettings, Trial};
pub use select::{entropy2, gain_ratio, select_features, Selection};

use crate::dataset::{Corpus, LabeledInstance};
use crate::error::{Error, Result};
use crate::learners::{fit, Classifier, ClassifierKind, HyperparamDraw, MODEL_FORMAT_VERSION};
use crate::seed::derive_seed;
use crate::smell::SmellKind;
use crate::stats::{Confusion, EvaluationReport, FoldEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Validation {
    WithinProject,
    CrossProject,
}

impl Validation {
    pub fn name(self) -> &'static str {
        match self {
            Validation::WithinProject => "within",
            Validation::CrossProject => "cross",
        }
    }
}

impl fmt::Display for Validation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Validation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "within" | "within_project" => Ok(Validation::WithinProject),
            "cross" | "cross_project" => Ok(Validation::CrossProject),
            _ => Err(Error::InvalidArgument(format!("unknown validation scheme `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub smell: SmellKind,
    pub classifier: ClassifierKind,
    pub balancing: Balancing,
    pub feature_selection: bool,
    /// Random search on; otherwise the learner defaults are used.
    pub tuning: bool,
    pub search_iterations: usize,
    pub inner_folds: usize,
    pub outer_folds: usize,
    pub repeats: usize,
    pub seed: u64,
    pub validation: Validation,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            smell: SmellKind::EagerTest,
            classifier: ClassifierKind::RandomForest,
            balancing: Balancing::None,
            feature_selection: true,
            tuning: true,
            search_iterations: 10,
            inner_folds: 3,
            outer_folds: 10,
            repeats: 1,
            seed: 0,
            validation: Validation::WithinProject,
        }
    }
}

impl PipelineConfig {
    pub fn check(&self) -> Result<()> {
        if self.search_iterations < 1 {
            return Err(Error::InvalidArgument("search_iterations must be >= 1".into()));
        }
        if self.inner_folds < 2 {
            return Err(Error::InvalidArgument("inner_folds must be >= 2".into()));
        }
        if self.outer_folds < 2 {
            return Err(Error::InvalidArgument("outer_folds must be >= 2".into()));
        }
        if self.repeats < 1 {
            return Err(Error::InvalidArgument("repeats must be >= 1".into()));
        }
        Ok(())
    }

    /// Names the axes that distinguish configurations in an ablation.
    pub fn id(&self) -> String {
        format!(
            "{}/{}/{}/fs={}/hp={}/{}",
            self.smell.short_name(),
            self.classifier,
            self.balancing,
            self.feature_selection as u8,
            self.tuning as u8,
            self.validation
        )
    }

    fn search_settings(&self) -> SearchSettings {
        SearchSettings {
            iterations: self.search_iterations,
            inner_folds: self.inner_folds,
            balancing: self.balancing,
        }
    }
}

/// Balances with fallbacks instead of failing: single-class input is left
/// alone, and a minority too small for SMOTE's k shrinks k (or, with one
/// minority row, switches to random over-sampling).
pub(crate) fn balance_adaptive(x: &[Vec<f64>], y: &[bool], strategy: Balancing, seed: u64) -> (Balanced, Vec<String>) {
    let identity = || balance(x, y, Balancing::None, seed).expect("identity balancing cannot fail");
    match balance(x, y, strategy, seed) {
        Ok(b) => {
            let w = b.warnings.clone();
            (b, w)
        }
        Err(Error::SingleClass) => (identity(), vec![format!("{strategy} skipped: training split has one class")]),
        Err(Error::MinorityTooSmall { minority, .. }) if minority >= 2 => {
            let b = balance_with_k(x, y, strategy, minority - 1, seed).expect("k fits the minority");
            let mut w = b.warnings.clone();
            w.insert(0, format!("{strategy}: minority has {minority} rows, used k = {}", minority - 1));
            (b, w)
        }
        Err(Error::MinorityTooSmall { .. }) => {
            let b = balance(x, y, Balancing::RandomOver, seed).expect("random over-sampling accepts one row");
            (b, vec![format!("{strategy}: single minority row, used random over-sampling")])
        }
        Err(e) => unreachable!("balancing validated input: {e}"),
    }
}

/// A pipeline fitted on one training set, usable on new feature vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub config: PipelineConfig,
    pub n_inputs: usize,
    pub selection: Selection,
    pub scaler: MinMaxScaler,
    pub hyperparams: HyperparamDraw,
    pub inner_mcc: Option<f64>,
    pub classifier: Classifier,
    /// Class counts (negative, positive) after balancing.
    pub balanced_counts: (usize, usize),
    pub warnings: Vec<String>,
}

impl TrainedModel {
    pub fn fit(x: &[Vec<f64>], y: &[bool], config: &PipelineConfig, seed: u64) -> Result<Self> {
        config.check()?;
        crate::learners::validate_matrix(x, Some(y))?;
        let mut warnings = Vec::new();
        let selection = if config.feature_selection {
            let s = select_features(x, y);
            warnings.extend(s.warning.clone());
            s
        } else {
            Selection::all(x[0].len())
        };
        let projected: Vec<Vec<f64>> = x.iter().map(|r| selection.project(r)).collect();
        let scaler = MinMaxScaler::fit(&projected);
        let scaled: Vec<Vec<f64>> = projected.iter().map(|r| scaler.apply(r)).collect();

        let single_class = y.iter().all(|&v| v) || y.iter().all(|&v| !v);
        let (hyperparams, inner_mcc) = if config.tuning && !single_class {
            match random_search(
                config.classifier,
                &scaled,
                y,
                &config.search_settings(),
                derive_seed(seed, &["search"]),
            ) {
                Ok(out) => {
                    warnings.extend(out.warnings);
                    (out.best, Some(out.best_mcc))
                }
                Err(Error::SearchExhausted) => {
                    warnings.push("hyper-parameter search had no usable inner fold; using defaults".into());
                    (HyperparamDraw::default(), None)
                }
                Err(e) => return Err(e),
            }
        } else {
            (HyperparamDraw::default(), None)
        };

        let (balanced, bw) = balance_adaptive(&scaled, y, config.balancing, derive_seed(seed, &["balance"]));
        warnings.extend(bw);
        let positives = balanced.y.iter().filter(|&&v| v).count();
        let classifier = fit(
            config.classifier,
            &balanced.x,
            &balanced.y,
            &hyperparams,
            derive_seed(seed, &["fit"]),
        )?;
        Ok(TrainedModel {
            config: config.clone(),
            n_inputs: x[0].len(),
            selection,
            scaler,
            hyperparams,
            inner_mcc,
            classifier,
            balanced_counts: (balanced.y.len() - positives, positives),
            warnings,
        })
    }

    pub fn score(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.n_inputs {
            return Err(Error::Arity {
                expected: self.n_inputs,
                actual: features.len(),
            });
        }
        self.classifier.score(&self.scaler.apply(&self.selection.project(features)))
    }

    /// Fits on every instance of `corpus` for `config.smell`.
    pub fn fit_corpus(corpus: &Corpus, config: &PipelineConfig) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::InvalidArgument("corpus has no instances".into()));
        }
        let (x, y): (Vec<Vec<f64>>, Vec<bool>) = corpus
            .instances()
            .map(|i| (i.features.to_array().to_vec(), i.labels.get(config.smell)))
            .unzip();
        Self::fit(&x, &y, config, derive_seed(config.seed, &["train", &config.id()]))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&TrainedModelFile {
            format_version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let probe: serde_json::Value = serde_json::from_str(text)?;
        let found = probe
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::Schema("model file lacks format_version".into()))?;
        if found != u64::from(MODEL_FORMAT_VERSION) {
            return Err(Error::ModelVersion {
                found: u32::try_from(found).unwrap_or(u32::MAX),
                expected: MODEL_FORMAT_VERSION,
            });
        }
        let file: TrainedModelFile = serde_json::from_value(probe)?;
        Ok(file.model)
    }
}

#[derive(Serialize, Deserialize)]
struct TrainedModelFile {
    format_version: u32,
    model: TrainedModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub score: f64,
    pub truth: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    /// Tested project (the held-out one under cross-project validation).
    pub project: String,
    pub fold: usize,
    pub fold_id: String,
    pub confusion: Confusion,
    pub predictions: Vec<Prediction>,
    pub train_ids: Vec<String>,
    pub selected_features: Vec<usize>,
    pub scaler: MinMaxScaler,
    pub hyperparams: HyperparamDraw,
    pub inner_mcc: Option<f64>,
    pub balanced_counts: (usize, usize),
    pub warnings: Vec<String>,
}

fn matrix(rows: &[&LabeledInstance], smell: SmellKind) -> (Vec<Vec<f64>>, Vec<bool>) {
    (
        rows.iter().map(|r| r.features.to_array().to_vec()).collect(),
        rows.iter().map(|r| r.labels.get(smell)).collect(),
    )
}

fn run_fold(
    project: &str,
    fold: usize,
    fold_id: String,
    train: &[&LabeledInstance],
    test: &[&LabeledInstance],
    config: &PipelineConfig,
) -> Result<FoldResult> {
    let (x, y) = matrix(train, config.smell);
    let seed = derive_seed(config.seed, &["fold", &fold_id, &config.id()]);
    let model = TrainedModel::fit(&x, &y, config, seed)?;
    let mut predictions = Vec::with_capacity(test.len());
    let mut confusion = Confusion::default();
    for inst in test {
        let score = model.score(&inst.features.to_array())?;
        let truth = inst.labels.get(config.smell);
        confusion.record(score >= 0.5, truth);
        predictions.push(Prediction {
            id: inst.id.clone(),
            score,
            truth,
        });
    }
    Ok(FoldResult {
        project: project.to_string(),
        fold,
        fold_id,
        confusion,
        predictions,
        train_ids: train.iter().map(|r| r.id.clone()).collect(),
        selected_features: model.selection.columns,
        scaler: model.scaler,
        hyperparams: model.hyperparams,
        inner_mcc: model.inner_mcc,
        balanced_counts: model.balanced_counts,
        warnings: model.warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRun {
    pub folds: Vec<FoldResult>,
    pub warnings: Vec<String>,
}

struct Job<'a> {
    project: &'a str,
    fold: usize,
    fold_id: String,
    train: Vec<&'a LabeledInstance>,
    test: Vec<&'a LabeledInstance>,
}

fn run_jobs(jobs: Vec<Job<'_>>, config: &PipelineConfig, warnings: Vec<String>) -> Result<ValidationRun> {
    let folds = jobs
        .into_par_iter()
        .map(|j| run_fold(j.project, j.fold, j.fold_id, &j.train, &j.test, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(ValidationRun { folds, warnings })
}

/// Stratified k-fold inside each project. Projects whose minority class has
/// fewer than `outer_folds` rows use one fold per minority row; projects
/// with fewer than two minority rows are skipped.
pub fn within_project_validate(corpus: &Corpus, config: &PipelineConfig) -> Result<ValidationRun> {
    config.check()?;
    let mut warnings = Vec::new();
    let mut jobs = Vec::new();
    for (project, rows) in &corpus.projects {
        let y: Vec<bool> = rows.iter().map(|r| r.labels.get(config.smell)).collect();
        let positives = y.iter().filter(|&&v| v).count();
        let minority = positives.min(y.len() - positives);
        if minority < 2 {
            warnings.push(format!("{project}: minority class has {minority} instance(s); project skipped"));
            continue;
        }
        let k = config.outer_folds.min(minority);
        if k < config.outer_folds {
            warnings.push(format!("{project}: minority class has {minority} instances; using {k} folds"));
        }
        for r in 0..config.repeats {
            let partition_seed = derive_seed(config.seed, &["partition", project, &r.to_string()]);
            for (f, test_rows) in stratified_folds(&y, k, partition_seed).into_iter().enumerate() {
                let train_rows = training_rows(rows.len(), &test_rows);
                jobs.push(Job {
                    project,
                    fold: r * k + f,
                    fold_id: format!("{project}/r{r}/f{f}"),
                    train: train_rows.iter().map(|&i| &rows[i]).collect(),
                    test: test_rows.iter().map(|&i| &rows[i]).collect(),
                });
            }
        }
    }
    if jobs.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no project has two or more minority instances for {}",
            config.smell
        )));
    }
    run_jobs(jobs, config, warnings)
}

/// Leave-one-project-out: fold i tests on project i and trains on the rest.
pub fn cross_project_validate(corpus: &Corpus, config: &PipelineConfig) -> Result<ValidationRun> {
    config.check()?;
    let projects: Vec<&String> = corpus.projects.keys().collect();
    if projects.len() < 2 {
        return Err(Error::TooFewProjects(projects.len()));
    }
    let jobs = projects
        .iter()
        .enumerate()
        .map(|(f, held_out)| Job {
            project: held_out.as_str(),
            fold: f,
            fold_id: held_out.to_string(),
            train: corpus
                .projects
                .iter()
                .filter(|(p, _)| p != held_out)
                .flat_map(|(_, rows)| rows.iter())
                .collect(),
            test: corpus.projects[*held_out].iter().collect(),
        })
        .collect();
    run_jobs(jobs, config, Vec::new())
}

pub fn validate(corpus: &Corpus, config: &PipelineConfig) -> Result<ValidationRun> {
    match config.validation {
        Validation::WithinProject => within_project_validate(corpus, config),
        Validation::CrossProject => cross_project_validate(corpus, config),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub report: EvaluationReport,
    pub run: ValidationRun,
}

/// Validates `config` on `corpus` and summarizes the folds in a report.
pub fn evaluate(corpus: &Corpus, config: &PipelineConfig) -> Result<Evaluation> {
    let run = validate(corpus, config)?;
    let entries = run
        .folds
        .iter()
        .map(|f| FoldEntry {
            project: f.project.clone(),
            fold: f.fold,
            tp: f.confusion.tp,
            fp: f.confusion.fp,
            tn: f.confusion.tn,
            fn_: f.confusion.fn_,
        })
        .collect();
    let scored: Vec<(f64, bool)> = run
        .folds
        .iter()
        .flat_map(|f| f.predictions.iter().map(|p| (p.score, p.truth)))
        .collect();
    let mut warnings = run.warnings.clone();
    for f in &run.folds {
        warnings.extend(f.warnings.iter().map(|w| format!("{}: {w}", f.fold_id)));
    }
    let report = EvaluationReport::build(config.smell, serde_json::to_value(config)?, entries, &scored, warnings)?;
    Ok(Evaluation { report, run })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Labels;
    use crate::metrics::FeatureVector;

    pub(crate) fn toy_corpus(projects: usize, per_project: usize) -> Corpus {
        let mut v = Vec::new();
        for p in 0..projects {
            for i in 0..per_project {
                let smelly = i % 3 == 0;
                v.push(LabeledInstance {
                    id: format!("p{p}/{i}"),
                    project: format!("p{p}"),
                    class: "C".into(),
                    method: format!("m{i}"),
                    features: FeatureVector {
                        nmc: if smelly { 6 + i % 4 } else { 1 + i % 2 },
                        ptmi: i % 5,
                        pet: (i % 7) as f64 / 7.0,
                        ..FeatureVector::default()
                    },
                    labels: Labels([smelly, false, false, false]),
                });
            }
        }
        Corpus::from_instances(v).unwrap()
    }

    fn quick(validation: Validation) -> PipelineConfig {
        PipelineConfig {
            classifier: ClassifierKind::DecisionTree,
            balancing: Balancing::Smote,
            search_iterations: 2,
            validation,
            ..PipelineConfig::default()
        }
    }

    #[test]
    fn within_project_folds_partition_each_project() {
        let corpus = toy_corpus(2, 45);
        let run = within_project_validate(&corpus, &quick(Validation::WithinProject)).unwrap();
        assert_eq!(run.folds.len(), 20);
        for project in ["p0", "p1"] {
            let mut tested: Vec<&str> = run
                .folds
                .iter()
                .filter(|f| f.project == project)
                .flat_map(|f| f.predictions.iter().map(|p| p.id.as_str()))
                .collect();
            tested.sort_unstable();
            let mut expected: Vec<&str> = corpus.projects[project].iter().map(|r| r.id.as_str()).collect();
            expected.sort_unstable();
            assert_eq!(tested, expected);
        }
        for f in &run.folds {
            assert_eq!(f.confusion.total(), f.predictions.len());
            assert!(f.predictions.iter().all(|p| !f.train_ids.contains(&p.id)));
        }
    }

    #[test]
    fn small_minority_reduces_or_skips() {
        let corpus = toy_corpus(1, 12);
        let run = within_project_validate(&corpus, &quick(Validation::WithinProject)).unwrap();
        assert_eq!(run.folds.len(), 4);
        assert!(run.warnings[0].contains("using 4 folds"));
        let tiny = toy_corpus(1, 3);
        assert!(within_project_validate(&tiny, &quick(Validation::WithinProject)).is_err());
    }

    #[test]
    fn cross_project_holds_out_each_project_once() {
        let corpus = toy_corpus(3, 30);
        let run = cross_project_validate(&corpus, &quick(Validation::CrossProject)).unwrap();
        let held: Vec<&str> = run.folds.iter().map(|f| f.project.as_str()).collect();
        assert_eq!(held, vec!["p0", "p1", "p2"]);
        for f in &run.folds {
            assert!(f.train_ids.iter().all(|id| !id.starts_with(&format!("{}/", f.project))));
            assert_eq!(f.train_ids.len(), 60);
        }
        assert!(matches!(
            cross_project_validate(&toy_corpus(1, 30), &quick(Validation::CrossProject)),
            Err(Error::TooFewProjects(1))
        ));
    }

    #[test]
    fn evaluation_is_deterministic() {
        let corpus = toy_corpus(2, 30);
        let cfg = quick(Validation::WithinProject);
        let a = serde_json::to_string(&evaluate(&corpus, &cfg).unwrap().report).unwrap();
        let b = serde_json::to_string(&evaluate(&corpus, &cfg).unwrap().report).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn config_checks_and_ids() {
        let bad = PipelineConfig {
            inner_folds: 1,
            ..PipelineConfig::default()
        };
        assert!(bad.check().is_err());
        assert_eq!(PipelineConfig::default().id(), "eager/random_forest/none/fs=1/hp=1/within");
    }

    #[test]
    fn trained_model_round_trips_and_checks_version() {
        let corpus = toy_corpus(1, 30);
        let model = TrainedModel::fit_corpus(&corpus, &quick(Validation::WithinProject)).unwrap();
        let text = model.to_json().unwrap();
        let back = TrainedModel::from_json(&text).unwrap();
        assert_eq!(back, model);
        let row = corpus.instances().next().unwrap().features.to_array();
        assert_eq!(back.score(&row).unwrap(), model.score(&row).unwrap());
        let bumped = text.replacen("\"format_version\": 1", "\"format_version\": 2", 1);
        assert!(matches!(TrainedModel::from_json(&bumped), Err(Error::ModelVersion { found: 2, .. })));
    }
}
