//! The nine per-test metrics used as classifier features.

mod coverage;
mod csv_io;
pub mod text;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::facts::{ProductionIndex, ResourceKind, TestCase};

pub use coverage::{pair_redundancy, static_coverage, suite_redundancy, CoverageMap};
pub(crate) use csv_io::check_header;
pub use csv_io::{read_feature_csv, write_feature_csv, FeatureRow, FEATURE_HEADER};

pub const FEATURE_NAMES: [&str; 9] = [
    "nmc", "ptmi", "pet", "nrf", "nrdb", "ernc", "frnc", "pr", "sr",
];

/// Metric values for one test. Counts are stored as integers, ratios in
/// `[0, 1]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    /// Number of method calls.
    pub nmc: usize,
    /// Number of production-type method invocations.
    pub ptmi: usize,
    /// Eager-test probability from textual content.
    pub pet: f64,
    /// References to files.
    pub nrf: usize,
    /// References to databases.
    pub nrdb: usize,
    /// Non-file external resources whose state is not checked.
    pub ernc: usize,
    /// File resources whose state is not checked.
    pub frnc: usize,
    /// Pair redundancy (max over partners).
    pub pr: f64,
    /// Suite redundancy.
    pub sr: f64,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; 9] {
        [
            self.nmc as f64,
            self.ptmi as f64,
            self.pet,
            self.nrf as f64,
            self.nrdb as f64,
            self.ernc as f64,
            self.frnc as f64,
            self.pr,
            self.sr,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

pub fn nmc(test: &TestCase) -> usize {
    test.invocations.len()
}

/// Invocations whose receiver is a production type. The test must have been
/// passed through [`ProductionIndex::annotate`] for chained calls to count.
pub fn ptmi(test: &TestCase, index: &ProductionIndex) -> usize {
    test.invocations
        .iter()
        .filter(|i| {
            i.receiver_type
                .as_deref()
                .is_some_and(|t| index.is_production_type(t))
        })
        .count()
}

/// Distinct production methods called by the test, in first-call order.
pub fn production_signatures(test: &TestCase, index: &ProductionIndex) -> Vec<String> {
    let mut seen = Vec::new();
    for inv in &test.invocations {
        let Some(ty) = inv.receiver_type.as_deref() else {
            continue;
        };
        if let Some(sig) = index.call_signature(ty, &inv.callee_name, inv.arg_count) {
            if !seen.contains(&sig) {
                seen.push(sig);
            }
        }
    }
    seen
}

/// Conceptual cohesion of the production methods a test calls: mean
/// pairwise cosine of their TF-IDF identifier vectors, IDF taken over all
/// production methods. `None` with fewer than two distinct methods.
pub fn conceptual_cohesion(test: &TestCase, index: &ProductionIndex) -> Option<f64> {
    let docs: Vec<Vec<String>> = production_signatures(test, index)
        .iter()
        .map(|sig| {
            let tokens = index.method_tokens(sig);
            if tokens.is_empty() {
                // Method not declared in the scanned sources: use its name.
                let name = sig.split(['.', '/']).nth(1).unwrap_or_default();
                text::identifier_terms(&[name])
            } else {
                text::identifier_terms(tokens)
            }
        })
        .collect();
    let n = index.document_count();
    let idf = |t: &str| text::smoothed_idf(n, index.document_frequency(t));
    text::textual_cohesion(&docs, &idf)
}

/// `1 − cohesion`; 0 when the test calls fewer than two production methods.
pub fn pet(test: &TestCase, index: &ProductionIndex) -> f64 {
    conceptual_cohesion(test, index)
        .map(|c| (1.0 - c).clamp(0.0, 1.0))
        .unwrap_or(0.0)
}

fn count_refs(test: &TestCase, pred: impl Fn(ResourceKind, bool) -> bool) -> usize {
    test.resource_refs
        .iter()
        .filter(|r| pred(r.kind, r.state_checked))
        .count()
}

pub fn nrf(test: &TestCase) -> usize {
    count_refs(test, |k, _| k == ResourceKind::File)
}

pub fn nrdb(test: &TestCase) -> usize {
    count_refs(test, |k, _| k == ResourceKind::Database)
}

pub fn frnc(test: &TestCase) -> usize {
    count_refs(test, |k, checked| k == ResourceKind::File && !checked)
}

pub fn ernc(test: &TestCase) -> usize {
    count_refs(test, |k, checked| k != ResourceKind::File && !checked)
}

/// Maximum pair redundancy of `t` against every other suite member that
/// has coverage; 0 for a singleton suite.
pub fn max_pair_redundancy<S: AsRef<str>>(t: &str, suite: &[S], cov: &CoverageMap) -> Result<f64> {
    let mut best = 0.0f64;
    let own = cov.get(t)?;
    if own.is_empty() {
        return Err(Error::CoverageUndefined(t.to_string()));
    }
    for u in suite.iter().map(AsRef::as_ref).filter(|u| *u != t) {
        if cov.contains(u) {
            best = best.max(pair_redundancy(t, u, cov)?);
        }
    }
    Ok(best)
}

/// Assemble all nine metrics. Without a coverage map, PR and SR are 0 and
/// no coverage error can occur.
pub fn feature_vector<S: AsRef<str>>(
    test: &TestCase,
    index: &ProductionIndex,
    cov: Option<&CoverageMap>,
    suite: &[S],
) -> Result<FeatureVector> {
    let (pr, sr) = match cov {
        Some(cov) => (
            max_pair_redundancy(&test.id, suite, cov)?,
            suite_redundancy(&test.id, suite, cov)?,
        ),
        None => (0.0, 0.0),
    };
    Ok(FeatureVector {
        nmc: nmc(test),
        ptmi: ptmi(test, index),
        pet: pet(test, index),
        nrf: nrf(test),
        nrdb: nrdb(test),
        ernc: ernc(test),
        frnc: frnc(test),
        pr,
        sr,
    })
}

/// Feature rows for a whole extraction. Tests whose coverage is undefined
/// (they cover nothing) get PR = SR = 0 and are reported in the second
/// return value.
pub fn extract_features(
    tests: &[TestCase],
    index: &ProductionIndex,
    cov: &CoverageMap,
) -> (Vec<FeatureRow>, Vec<(String, Error)>) {
    let mut rows = Vec::with_capacity(tests.len());
    let mut issues = Vec::new();
    for t in tests {
        let suite: Vec<&str> = tests
            .iter()
            .filter(|u| u.project == t.project)
            .map(|u| u.id.as_str())
            .collect();
        let features = match feature_vector(t, index, Some(cov), &suite) {
            Ok(f) => f,
            Err(e @ (Error::CoverageUndefined(_) | Error::CoverageMissing(_))) => {
                issues.push((t.id.clone(), e));
                feature_vector::<&str>(t, index, None, &[]).expect("no coverage, no error")
            }
            Err(e) => {
                issues.push((t.id.clone(), e));
                continue;
            }
        };
        rows.push(FeatureRow {
            id: t.id.clone(),
            project: t.project.clone(),
            class: t.class_name.clone(),
            method: t.method_name.clone(),
            features,
        });
    }
    (rows, issues)
}
