//! Test smell detection for Java test suites.
//!
//! The crate extracts per-test facts from Java sources ([`facts`]), turns
//! them into nine metrics ([`metrics`]), runs rule-based detectors
//! ([`heuristics`]) and trains and evaluates learned detectors
//! ([`learners`], [`pipeline`], [`stats`]). [`dataset`] covers sampling,
//! rater agreement and the labeled CSV format.
//!
//! Everything stochastic takes an explicit seed; identical inputs and seeds
//! give identical outputs regardless of thread count.

pub mod dataset;
pub mod error;
pub mod facts;
pub mod heuristics;
pub mod learners;
pub mod metrics;
pub mod pipeline;
pub mod seed;
pub mod smell;
pub mod stats;

pub use dataset::{Corpus, LabeledInstance, Labels};
pub use error::{Error, Result};
pub use facts::{FactExtractor, Keywords, ProductionIndex, ResourceKind, ResourceRef, TestCase};
pub use heuristics::{Detection, DetectorKind, HeuristicConfig, HeuristicSet};
pub use learners::{Classifier, ClassifierKind, HyperparamDraw};
pub use metrics::{CoverageMap, FeatureRow, FeatureVector, FEATURE_NAMES};
pub use pipeline::{Balancing, FoldResult, PipelineConfig, TrainedModel, Validation};
pub use smell::SmellKind;
pub use stats::{ComparisonResult, Confusion, EvaluationReport, Magnitude};
