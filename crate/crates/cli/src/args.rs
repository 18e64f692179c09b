use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use smellml_core::{Balancing, ClassifierKind, SmellKind, Validation};

#[derive(Debug, Parser)]
#[command(name = "smellml", version, about = "Test smell detection for Java test suites")]
pub struct Cli {
    /// Worker threads (default: one per core). Outputs do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// key=value file; each key is a long flag name. Flags given on the
    /// command line win over the file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Where to write the run manifest (default: <out>.manifest.json).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Compute the nine metrics for every test method.
    Extract(ExtractArgs),
    /// Run the heuristic baselines.
    Detect(DetectArgs),
    /// Sample size for a proportion at the given confidence and margin.
    SampleSize(SampleSizeArgs),
    /// Stratified random sample of a feature CSV, proportional per project.
    Sample(SampleArgs),
    /// Cohen's kappa per smell between two rater files.
    Kappa(KappaArgs),
    /// Fit a model on a labeled CSV.
    Train(TrainArgs),
    /// Score a feature CSV with a trained model.
    Predict(PredictArgs),
    /// Within- or cross-project validation of one configuration.
    Validate(ValidateArgs),
    /// Evaluate the default configuration grid.
    Ablate(AblateArgs),
    /// Compare the learned detector with heuristic detections.
    Compare(CompareArgs),
}

pub const SUBCOMMANDS: [&str; 10] = [
    "extract",
    "detect",
    "sample-size",
    "sample",
    "kappa",
    "train",
    "predict",
    "validate",
    "ablate",
    "compare",
];

/// Global options that take a value; used when locating the subcommand.
pub const GLOBAL_VALUED: [&str; 3] = ["--jobs", "--config", "--manifest"];

#[derive(Debug, Args, Serialize)]
pub struct SourceArgs {
    /// Test source roots (directories or files).
    #[arg(long, required = true, num_args = 1..)]
    pub tests: Vec<PathBuf>,

    /// Production source roots.
    #[arg(long, required = true, num_args = 1..)]
    pub production: Vec<PathBuf>,

    /// Tab-separated coverage file; without it coverage is approximated
    /// statically.
    #[arg(long)]
    pub coverage: Option<PathBuf>,

    /// Call depth of the static coverage approximation.
    #[arg(long, default_value_t = 1)]
    pub coverage_depth: usize,

    /// Project name used in test ids.
    #[arg(long, default_value = "default")]
    pub project: String,

    /// Resource keyword file with [file], [database] and [network] sections.
    #[arg(long)]
    pub keywords: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub sources: SourceArgs,

    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct DetectArgs {
    #[command(flatten)]
    pub sources: SourceArgs,

    #[arg(long, value_parser = ["tsdetect", "darts", "teredetect", "all"])]
    pub heuristic: String,

    /// Minimum production calls for the tsDetect eager rule to fire.
    #[arg(long, default_value_t = 1)]
    pub eager_threshold: usize,

    /// Flag Darts eager tests on cohesion below 0.5 instead of above.
    #[arg(long)]
    pub darts_invert: bool,

    /// Suite redundancy at or above which TeReDetect flags a test.
    #[arg(long, default_value_t = 1.0)]
    pub redundancy_threshold: f64,

    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleSizeArgs {
    #[arg(long)]
    pub population: usize,

    #[arg(long, default_value_t = 0.99)]
    pub confidence: f64,

    #[arg(long, default_value_t = 0.01)]
    pub margin: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    /// Feature CSV to sample from.
    #[arg(long)]
    pub input: PathBuf,

    /// Sample size; when absent it is computed from --confidence and --margin.
    #[arg(long)]
    pub size: Option<usize>,

    #[arg(long, default_value_t = 0.99)]
    pub confidence: f64,

    #[arg(long, default_value_t = 0.01)]
    pub margin: f64,

    #[arg(long)]
    pub seed: u64,

    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct KappaArgs {
    /// First rater's label file.
    pub first: PathBuf,
    /// Second rater's label file.
    pub second: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ModelArgs {
    /// Labeled CSV.
    #[arg(long)]
    pub data: PathBuf,

    #[arg(long, default_value = "random_forest")]
    pub classifier: ClassifierKind,

    #[arg(long, default_value = "none")]
    pub balancing: Balancing,

    #[arg(long)]
    pub no_feature_selection: bool,

    /// Use default hyper-parameters instead of random search.
    #[arg(long)]
    pub no_tuning: bool,

    #[arg(long, default_value_t = 10)]
    pub search_iterations: usize,

    #[arg(long, default_value_t = 3)]
    pub inner_folds: usize,

    #[arg(long, default_value_t = 10)]
    pub folds: usize,

    /// Independent repetitions of within-project cross-validation.
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,

    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    #[arg(long)]
    pub smell: SmellKind,

    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct PredictArgs {
    /// Model file written by `train`.
    #[arg(long)]
    pub model: PathBuf,

    /// Feature CSV.
    #[arg(long)]
    pub input: PathBuf,

    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    #[arg(long)]
    pub smell: SmellKind,

    #[arg(long, default_value = "within")]
    pub scheme: Validation,

    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct AblateArgs {
    #[arg(long)]
    pub data: PathBuf,

    /// One smell or `all`.
    #[arg(long)]
    pub smell: SmellSelection,

    #[arg(long)]
    pub no_tuning: bool,

    #[arg(long, default_value_t = 10)]
    pub search_iterations: usize,

    #[arg(long, default_value_t = 3)]
    pub inner_folds: usize,

    #[arg(long, default_value_t = 10)]
    pub folds: usize,

    #[arg(long, default_value_t = 1)]
    pub repeats: usize,

    #[arg(long)]
    pub seed: u64,

    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// One smell or `all`.
    #[arg(long)]
    pub smell: SmellSelection,

    #[arg(long, default_value = "within")]
    pub scheme: Validation,

    /// Detections CSV written by `detect`.
    #[arg(long)]
    pub detections: PathBuf,

    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SmellSelection {
    All,
    One(SmellKind),
}

impl SmellSelection {
    pub fn smells(self) -> Vec<SmellKind> {
        match self {
            SmellSelection::All => SmellKind::ALL.to_vec(),
            SmellSelection::One(s) => vec![s],
        }
    }
}

impl FromStr for SmellSelection {
    type Err = smellml_core::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "all" {
            Ok(SmellSelection::All)
        } else {
            s.parse().map(SmellSelection::One)
        }
    }
}

impl fmt::Display for SmellSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SmellSelection::All => f.write_str("all"),
            SmellSelection::One(s) => f.write_str(s.short_name()),
        }
    }
}

/// Value of `--config`, from either `--config FILE` or `--config=FILE`.
pub fn config_path(argv: &[String]) -> Option<PathBuf> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--" {
            break;
        }
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(v));
        }
    }
    None
}

#[derive(Debug, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Parses `key=value` lines. Blank lines and lines starting with `#` are
/// skipped; keys may be written with or without the leading dashes.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError(format!("config line {}: expected key=value", i + 1)));
        };
        let key = k.trim().trim_start_matches('-').replace('_', "-");
        if key.is_empty() {
            return Err(ConfigError(format!("config line {}: empty key", i + 1)));
        }
        if matches!(key.as_str(), "config" | "manifest") {
            return Err(ConfigError(format!("config line {}: `{key}` cannot be set from a config file", i + 1)));
        }
        if out.iter().any(|(seen, _)| *seen == key) {
            return Err(ConfigError(format!("config line {}: duplicate key `{key}`", i + 1)));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

/// Inserts config entries as flags right after the subcommand name, skipping
/// keys the command line already sets. `true` turns a key into a bare flag
/// and `false` drops it; list values are separated by whitespace.
pub fn inject_config(argv: &[String], entries: &[(String, String)]) -> Vec<String> {
    let Some(pos) = subcommand_position(argv) else {
        return argv.to_vec();
    };
    let explicit = |key: &str| {
        let flag = format!("--{key}");
        let with_eq = format!("{flag}=");
        argv.iter().skip(1).any(|a| *a == flag || a.starts_with(&with_eq))
    };
    let mut injected = Vec::new();
    for (key, value) in entries {
        if explicit(key) {
            continue;
        }
        match value.as_str() {
            "true" => injected.push(format!("--{key}")),
            "false" => {}
            _ => {
                injected.push(format!("--{key}"));
                injected.extend(value.split_whitespace().map(str::to_string));
            }
        }
    }
    let mut out = argv[..=pos].to_vec();
    out.extend(injected);
    out.extend_from_slice(&argv[pos + 1..]);
    out
}

fn subcommand_position(argv: &[String]) -> Option<usize> {
    let mut i = 1;
    while i < argv.len() {
        let a = argv[i].as_str();
        if GLOBAL_VALUED.contains(&a) {
            i += 2;
            continue;
        }
        if SUBCOMMANDS.contains(&a) {
            return Some(i);
        }
        i += 1;
    }
    None
}

/// Default manifest location next to a primary output.
pub fn manifest_next_to(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn config_entries_land_after_the_subcommand_and_lose_to_flags() {
        let entries = parse_config("# comment\nseed = 3\nclassifier=svm\nno_tuning=true\ndarts-invert=false\n").unwrap();
        let out = inject_config(&argv("smellml --jobs 2 train --classifier mlp"), &entries);
        assert_eq!(out, argv("smellml --jobs 2 train --seed 3 --no-tuning --classifier mlp"));
    }

    #[test]
    fn config_rejects_bad_lines() {
        assert!(parse_config("seed").is_err());
        assert!(parse_config("seed=1\nseed=2").is_err());
        assert!(parse_config("config=x").is_err());
    }

    #[test]
    fn config_path_forms() {
        assert_eq!(config_path(&argv("s --config a.cfg x")), Some(PathBuf::from("a.cfg")));
        assert_eq!(config_path(&argv("s x --config=b.cfg")), Some(PathBuf::from("b.cfg")));
        assert_eq!(config_path(&argv("s x")), None);
    }

    #[test]
    fn manifest_path_appends_suffix() {
        assert_eq!(manifest_next_to(Path::new("out/r.json")), PathBuf::from("out/r.json.manifest.json"));
    }
}
