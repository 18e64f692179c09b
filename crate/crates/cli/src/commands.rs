use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use smellml_core::dataset::{self, load_corpus, read_rater_labels, required_sample_size};
use smellml_core::facts::{self, Extraction};
use smellml_core::heuristics::{read_detections, run_detectors, write_detections};
use smellml_core::metrics::{extract_features, read_feature_csv, static_coverage, write_feature_csv};
use smellml_core::pipeline::{ablation, default_grid, evaluate};
use smellml_core::stats::{compare_approaches, FoldEntry};
use smellml_core::{
    Corpus, CoverageMap, Detection, Error, EvaluationReport, FactExtractor, FeatureRow, HeuristicConfig, Keywords,
    PipelineConfig, SmellKind, TrainedModel, Validation,
};

use crate::args::*;
use crate::manifest::{corpus_hash, write_atomic};

/// A failed run: the exit code and what to tell the user.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CORPUS: i32 = 2;
pub const EXIT_SCHEMA: i32 = 3;
pub const EXIT_PIPELINE: i32 = 4;

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn corpus(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_CORPUS,
            message: message.into(),
        }
    }

    fn pipeline(e: impl fmt::Display) -> Self {
        CliError {
            code: EXIT_PIPELINE,
            message: e.to_string(),
        }
    }

    /// Errors while reading inputs: missing or empty corpora exit 2,
    /// malformed content exits 3.
    fn input(e: Error) -> Self {
        let code = match e {
            Error::CorpusEmpty | Error::Io { .. } => EXIT_CORPUS,
            _ => EXIT_SCHEMA,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }

    fn output(path: &Path, e: std::io::Error) -> Self {
        CliError::pipeline(format!("writing {}: {e}", path.display()))
    }
}

/// What a command reports into the run manifest.
#[derive(Debug, Default)]
pub struct RunRecord {
    pub outputs: Vec<PathBuf>,
    pub corpus_hash: Option<String>,
    pub seed: Option<u64>,
    pub results: Option<Value>,
    pub warnings: Vec<String>,
    pub failing_config: Option<Value>,
}

impl RunRecord {
    fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        write_atomic(path, bytes).map_err(|e| CliError::output(path, e))?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }

    fn write_json(&mut self, path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(CliError::pipeline)?;
        text.push('\n');
        self.write(path, text.as_bytes())
    }
}

pub fn run(command: &Command, record: &mut RunRecord) -> Result<(), CliError> {
    match command {
        Command::Extract(a) => extract(a, record),
        Command::Detect(a) => detect(a, record),
        Command::SampleSize(a) => sample_size(a, record),
        Command::Sample(a) => sample(a, record),
        Command::Kappa(a) => kappa(a, record),
        Command::Train(a) => train(a, record),
        Command::Predict(a) => predict(a, record),
        Command::Validate(a) => validate(a, record),
        Command::Ablate(a) => ablate(a, record),
        Command::Compare(a) => compare(a, record),
    }
}

/// Primary output path, if the command has one.
pub fn primary_output(command: &Command) -> Option<&Path> {
    match command {
        Command::Extract(a) => Some(&a.out),
        Command::Detect(a) => Some(&a.out),
        Command::Sample(a) => Some(&a.out),
        Command::Train(a) => Some(&a.out),
        Command::Predict(a) => Some(&a.out),
        Command::Validate(a) => Some(&a.out),
        Command::Ablate(a) => Some(&a.out),
        Command::Compare(a) => Some(&a.out),
        Command::SampleSize(_) | Command::Kappa(_) => None,
    }
}

fn extract_sources(s: &SourceArgs, record: &mut RunRecord) -> Result<(Extraction, CoverageMap), CliError> {
    let mut roots: Vec<&Path> = s.tests.iter().map(PathBuf::as_path).collect();
    roots.extend(s.production.iter().map(PathBuf::as_path));
    let files: Vec<&Path> = s.coverage.iter().chain(&s.keywords).map(PathBuf::as_path).collect();
    record.corpus_hash = Some(corpus_hash(&roots, &files));

    let keywords = match &s.keywords {
        Some(p) => Keywords::load(p).map_err(CliError::input)?,
        None => Keywords::default(),
    };
    let extractor = FactExtractor::new(s.project.clone(), keywords);
    let ex = facts::extract(&extractor, &s.tests, &s.production).map_err(CliError::input)?;
    if ex.tests.is_empty() {
        return Err(CliError::corpus("no test methods found"));
    }
    for e in ex.errors.iter().chain(&ex.warnings) {
        record.warnings.push(format!("{}: {}", e.path.display(), e.message));
    }
    let coverage = match &s.coverage {
        Some(p) => CoverageMap::load(p).map_err(CliError::input)?,
        None => static_coverage(&ex.tests, &ex.index, s.coverage_depth),
    };
    Ok((ex, coverage))
}

fn extract(a: &ExtractArgs, record: &mut RunRecord) -> Result<(), CliError> {
    let (ex, coverage) = extract_sources(&a.sources, record)?;
    let (rows, issues) = extract_features(&ex.tests, &ex.index, &coverage);
    for (id, e) in &issues {
        record.warnings.push(format!("{id}: {e}"));
    }
    let mut buf = Vec::new();
    write_feature_csv(&rows, &mut buf).map_err(CliError::pipeline)?;
    record.write(&a.out, &buf)?;
    record.results = Some(json!({ "tests": rows.len(), "issues": issues.len() }));
    Ok(())
}

fn detect(a: &DetectArgs, record: &mut RunRecord) -> Result<(), CliError> {
    let set = a.heuristic.parse().map_err(|e: Error| CliError::usage(e.to_string()))?;
    let (ex, coverage) = extract_sources(&a.sources, record)?;
    let config = HeuristicConfig {
        eager_threshold: a.eager_threshold,
        darts_invert: a.darts_invert,
        redundancy_threshold: a.redundancy_threshold,
    };
    let detections = run_detectors(&ex.tests, &ex.index, &coverage, set, &config);
    let mut flagged: BTreeMap<String, usize> = BTreeMap::new();
    for d in &detections {
        *flagged
            .entry(format!("{}/{}", d.detector.name(), d.smell.short_name()))
            .or_default() += d.flagged as usize;
    }
    let mut buf = Vec::new();
    write_detections(&detections, &mut buf).map_err(CliError::pipeline)?;
    record.write(&a.out, &buf)?;
    record.results = Some(json!({ "tests": ex.tests.len(), "flagged": flagged }));
    Ok(())
}

fn sample_size(a: &SampleSizeArgs, record: &mut RunRecord) -> Result<(), CliError> {
    let n = required_sample_size(a.population, a.confidence, a.margin).map_err(|e| CliError::usage(e.to_string()))?;
    println!("{n}");
    record.results = Some(json!({ "sample_size": n }));
    Ok(())
}

fn read_features(path: &Path) -> Result<Vec<FeatureRow>, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::input(Error::Io {
        path: path.to_path_buf(),
        source: e,
    }))?;
    read_feature_csv(std::io::BufReader::new(file)).map_err(CliError::input)
}

fn sample(a: &SampleArgs, record: &mut RunRecord) -> Result<(), CliError> {
    record.seed = Some(a.seed);
    record.corpus_hash = Some(corpus_hash(&[], &[&a.input]));
    let rows = read_features(&a.input)?;
    if rows.is_empty() {
        return Err(CliError::corpus(format!("{} has no rows", a.input.display())));
    }
    let n = match a.size {
        Some(n) => n,
        None => required_sample_size(rows.len(), a.confidence, a.margin).map_err(|e| CliError::usage(e.to_string()))?,
    };
    let population = rows.len();
    let mut strata: BTreeMap<String, Vec<FeatureRow>> = BTreeMap::new();
    for r in rows {
        strata.entry(r.project.clone()).or_default().push(r);
    }
    let picked = dataset::stratified_sample(&strata, n, a.seed).map_err(|e| CliError::usage(e.to_string()))?;
    let per_project: BTreeMap<&String, usize> = picked.iter().map(|(p, v)| (p, v.len())).collect();
    let flat: Vec<FeatureRow> = picked.values().flatten().cloned().collect();
    let mut buf = Vec::new();
    write_feature_csv(&flat, &mut buf).map_err(CliError::pipeline)?;
    record.write(&a.out, &buf)?;
    record.results = Some(json!({ "population": population, "sample_size": n, "per_project": per_project }));
    Ok(())
}

fn kappa(a: &KappaArgs, record: &mut RunRecord) -> Result<(), CliError> {
    record.corpus_hash = Some(corpus_hash(&[], &[&a.first, &a.second]));
    let load = |p: &Path| {
        let f = fs::File::open(p).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        })?;
        read_rater_labels(std::io::BufReader::new(f))
    };
    let first = load(&a.first).map_err(CliError::input)?;
    let second = load(&a.second).map_err(CliError::input)?;
    let kappas = dataset::kappa_by_smell(&first, &second).map_err(CliError::input)?;
    let mut results = BTreeMap::new();
    for (smell, k) in kappas {
        println!("{}\t{k:.6}", smell.short_name());
        results.insert(smell.short_name(), k);
    }
    record.results = Some(json!({ "kappa": results, "items": first.rows.len() }));
    Ok(())
}

fn pipeline_config(m: &ModelArgs, smell: SmellKind, validation: Validation) -> Result<PipelineConfig, CliError> {
    let config = PipelineConfig {
        smell,
        classifier: m.classifier,
        balancing: m.balancing,
        feature_selection: !m.no_feature_selection,
        tuning: !m.no_tuning,
        search_iterations: m.search_iterations,
        inner_folds: m.inner_folds,
        outer_folds: m.folds,
        repeats: m.repeats,
        seed: m.seed,
        validation,
    };
    config.check().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(config)
}

fn load_labeled(path: &Path, record: &mut RunRecord) -> Result<Corpus, CliError> {
    record.corpus_hash = Some(corpus_hash(&[], &[path]));
    let corpus = load_corpus(path).map_err(CliError::input)?;
    if corpus.is_empty() {
        return Err(CliError::corpus(format!("{} has no rows", path.display())));
    }
    Ok(corpus)
}

/// Records `config` as the failing configuration and wraps the error.
fn failed(record: &mut RunRecord, config: &PipelineConfig, e: Error) -> CliError {
    record.failing_config = serde_json::to_value(config).ok();
    CliError::pipeline(format!("{}: {e}", config.id()))
}

fn train(a: &TrainArgs, record: &mut RunRecord) -> Result<(), CliError> {
    record.seed = Some(a.model.seed);
    let config = pipeline_config(&a.model, a.smell, Validation::WithinProject)?;
    let corpus = load_labeled(&a.model.data, record)?;
    let model = TrainedModel::fit_corpus(&corpus, &config).map_err(|e| failed(record, &config, e))?;
    let text = model.to_json().map_err(CliError::pipeline)? + "\n";
    record.write(&a.out, text.as_bytes())?;
    record.warnings.extend(model.warnings.iter().cloned());
    record.results = Some(json!({
        "instances": corpus.len(),
        "selected_features": model.selection.columns,
        "hyperparams": model.hyperparams,
        "inner_mcc": model.inner_mcc,
        "balanced_counts": model.balanced_counts,
    }));
    Ok(())
}

fn predict(a: &PredictArgs, record: &mut RunRecord) -> Result<(), CliError> {
    record.corpus_hash = Some(corpus_hash(&[], &[&a.input, &a.model]));
    let text = fs::read_to_string(&a.model).map_err(|e| {
        CliError::input(Error::Io {
            path: a.model.clone(),
            source: e,
        })
    })?;
    let model = TrainedModel::from_json(&text).map_err(CliError::input)?;
    let rows = read_features(&a.input)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::pipeline(e);
    w.write_record(["id", "score", "predicted"]).map_err(csv_err)?;
    let mut positives = 0;
    for r in &rows {
        let score = model.score(&r.features.to_array()).map_err(CliError::input)?;
        let predicted = score >= 0.5;
        positives += predicted as usize;
        w.write_record([r.id.as_str(), &score.to_string(), if predicted { "1" } else { "0" }])
            .map_err(csv_err)?;
    }
    let buf = w.into_inner().map_err(|e| CliError::pipeline(e.error()))?;
    record.write(&a.out, &buf)?;
    record.results = Some(json!({ "rows": rows.len(), "predicted_positive": positives, "smell": model.config.smell }));
    Ok(())
}

fn validate(a: &ValidateArgs, record: &mut RunRecord) -> Result<(), CliError> {
    record.seed = Some(a.model.seed);
    let config = pipeline_config(&a.model, a.smell, a.scheme)?;
    let corpus = load_labeled(&a.model.data, record)?;
    let evaluation = evaluate(&corpus, &config).map_err(|e| failed(record, &config, e))?;
    record.write_json(&a.out, &evaluation.report)?;
    record.warnings.extend(evaluation.report.warnings.iter().cloned());
    let folds: Vec<Value> = evaluation
        .run
        .folds
        .iter()
        .map(|f| {
            json!({
                "fold_id": f.fold_id,
                "project": f.project,
                "fold": f.fold,
                "confusion": f.confusion,
                "train_size": f.train_ids.len(),
                "test_size": f.predictions.len(),
                "selected_features": f.selected_features,
                "hyperparams": f.hyperparams,
                "inner_mcc": f.inner_mcc,
                "balanced_counts": f.balanced_counts,
            })
        })
        .collect();
    record.results = Some(json!({ "config_id": config.id(), "folds": folds }));
    Ok(())
}

fn ablate(a: &AblateArgs, record: &mut RunRecord) -> Result<(), CliError> {
    record.seed = Some(a.seed);
    let model_args = ModelArgs {
        data: a.data.clone(),
        classifier: smellml_core::ClassifierKind::RandomForest,
        balancing: smellml_core::Balancing::None,
        no_feature_selection: false,
        no_tuning: a.no_tuning,
        search_iterations: a.search_iterations,
        inner_folds: a.inner_folds,
        folds: a.folds,
        repeats: a.repeats,
        seed: a.seed,
    };
    let mut grid = Vec::new();
    for smell in a.smell.smells() {
        grid.extend(default_grid(&pipeline_config(&model_args, smell, Validation::WithinProject)?));
    }
    let corpus = load_labeled(&a.data, record)?;
    let table = ablation(&corpus, &grid).map_err(CliError::pipeline)?;
    record.write_json(&a.out, &table)?;
    let failures: Vec<Value> = table
        .entries
        .iter()
        .filter_map(|e| e.error.as_ref().map(|err| json!({ "config_id": e.config_id, "error": err })))
        .collect();
    record.results = Some(json!({ "entries": table.entries.len(), "failures": failures }));
    if let Some(first) = table.entries.iter().find(|e| e.error.is_some()) {
        if table.entries.iter().all(|e| e.error.is_some()) {
            record.failing_config = serde_json::to_value(&first.config).ok();
            return Err(CliError::pipeline(format!("every configuration failed; first: {}", first.config_id)));
        }
    }
    Ok(())
}

/// Heuristic flags as a report over the projects the learned detector was
/// evaluated on, one fold per project. Tests without a detection row count
/// as not flagged.
fn heuristic_report(
    corpus: &Corpus,
    smell: SmellKind,
    detector: &str,
    flags: &HashMap<&str, bool>,
    projects: &BTreeSet<&String>,
) -> Result<EvaluationReport, Error> {
    let mut folds = Vec::new();
    let mut scored = Vec::new();
    let mut missing = 0usize;
    for (project, instances) in &corpus.projects {
        if !projects.contains(project) {
            continue;
        }
        let mut entry = FoldEntry {
            project: project.clone(),
            fold: 0,
            tp: 0,
            fp: 0,
            tn: 0,
            fn_: 0,
        };
        for i in instances {
            let predicted = flags.get(i.id.as_str()).copied().unwrap_or_else(|| {
                missing += 1;
                false
            });
            let truth = i.labels.get(smell);
            match (predicted, truth) {
                (true, true) => entry.tp += 1,
                (true, false) => entry.fp += 1,
                (false, false) => entry.tn += 1,
                (false, true) => entry.fn_ += 1,
            }
            scored.push((if predicted { 1.0 } else { 0.0 }, truth));
        }
        folds.push(entry);
    }
    let mut warnings = Vec::new();
    if missing > 0 {
        warnings.push(format!("{missing} labeled tests have no {detector} detection; counted as not flagged"));
    }
    EvaluationReport::build(smell, json!({ "detector": detector }), folds, &scored, warnings)
}

fn compare(a: &CompareArgs, record: &mut RunRecord) -> Result<(), CliError> {
    record.seed = Some(a.model.seed);
    let configs = a
        .smell
        .smells()
        .into_iter()
        .map(|s| pipeline_config(&a.model, s, a.scheme))
        .collect::<Result<Vec<_>, _>>()?;
    let corpus = load_labeled(&a.model.data, record)?;
    record.corpus_hash = Some(corpus_hash(&[], &[&a.model.data, &a.detections]));
    let detections: Vec<Detection> = {
        let f = fs::File::open(&a.detections).map_err(|e| {
            CliError::input(Error::Io {
                path: a.detections.clone(),
                source: e,
            })
        })?;
        read_detections(std::io::BufReader::new(f)).map_err(CliError::input)?
    };

    let mut comparisons = Vec::new();
    let mut reports = BTreeMap::new();
    for config in &configs {
        let mut by_detector: BTreeMap<&str, HashMap<&str, bool>> = BTreeMap::new();
        for d in detections.iter().filter(|d| d.smell == config.smell) {
            by_detector
                .entry(d.detector.name())
                .or_default()
                .insert(d.test_id.as_str(), d.flagged);
        }
        if by_detector.is_empty() {
            record.warnings.push(format!("no detections for {}", config.smell.short_name()));
            continue;
        }
        let ml = evaluate(&corpus, config).map_err(|e| failed(record, config, e))?.report;
        let projects: BTreeSet<&String> = ml.project_mcc.keys().collect();
        let ml_name = format!("ml:{}", config.id());
        for (detector, flags) in &by_detector {
            let heuristic =
                heuristic_report(&corpus, config.smell, detector, flags, &projects).map_err(|e| failed(record, config, e))?;
            let cmp = compare_approaches(&ml_name, &ml, detector, &heuristic).map_err(|e| failed(record, config, e))?;
            record.warnings.extend(heuristic.warnings.iter().cloned());
            reports.insert(format!("{}/{}", config.smell.short_name(), detector), heuristic);
            comparisons.push(cmp);
        }
        reports.insert(format!("{}/ml", config.smell.short_name()), ml);
    }
    if comparisons.is_empty() {
        return Err(CliError {
            code: EXIT_SCHEMA,
            message: format!("{} has no detections for the requested smells", a.detections.display()),
        });
    }
    record.write_json(&a.out, &json!({ "comparisons": comparisons, "reports": reports }))?;
    let summary: Vec<Value> = comparisons
        .iter()
        .map(|c| json!({ "smell": c.smell, "a": c.a, "b": c.b, "wilcoxon_p": c.wilcoxon_p, "cliffs_delta": c.cliffs_delta }))
        .collect();
    record.results = Some(json!({ "comparisons": summary }));
    Ok(())
}
