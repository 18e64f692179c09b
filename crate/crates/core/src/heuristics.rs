//! Rule-based baseline detectors.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::facts::{ProductionIndex, ResourceKind, TestCase};
use crate::metrics::{self, CoverageMap};
use crate::smell::SmellKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    TsDetect,
    Darts,
    TeReDetect,
    Ml,
}

impl DetectorKind {
    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::TsDetect => "tsdetect",
            DetectorKind::Darts => "darts",
            DetectorKind::TeReDetect => "teredetect",
            DetectorKind::Ml => "ml",
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            DetectorKind::TsDetect,
            DetectorKind::Darts,
            DetectorKind::TeReDetect,
            DetectorKind::Ml,
        ]
        .into_iter()
        .find(|d| d.name() == s)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown detector `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Detection {
    pub test_id: String,
    pub smell: SmellKind,
    pub detector: DetectorKind,
    pub flagged: bool,
    pub evidence: String,
}

/// Thresholds for the baselines. The defaults need no tuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicConfig {
    /// Eager Test when strictly more distinct production methods are called.
    pub eager_threshold: usize,
    /// Flag Darts on low rather than high cohesion.
    pub darts_invert: bool,
    /// Test Redundancy when suite redundancy reaches this value.
    pub redundancy_threshold: f64,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig {
            eager_threshold: 1,
            darts_invert: false,
            redundancy_threshold: 1.0,
        }
    }
}

pub fn tsdetect_eager(test: &TestCase, index: &ProductionIndex, threshold: usize) -> Detection {
    let methods = metrics::production_signatures(test, index);
    let flagged = methods.len() > threshold;
    Detection {
        test_id: test.id.clone(),
        smell: SmellKind::EagerTest,
        detector: DetectorKind::TsDetect,
        flagged,
        evidence: if methods.is_empty() {
            "no production method calls".into()
        } else {
            format!(
                "{} distinct production methods: {}",
                methods.len(),
                methods.join(" ")
            )
        },
    }
}

pub fn tsdetect_mystery(test: &TestCase) -> Detection {
    let refs: Vec<_> = test
        .resource_refs
        .iter()
        .filter(|r| matches!(r.kind, ResourceKind::File | ResourceKind::Database))
        .collect();
    Detection {
        test_id: test.id.clone(),
        smell: SmellKind::MysteryGuest,
        detector: DetectorKind::TsDetect,
        flagged: !refs.is_empty(),
        evidence: if refs.is_empty() {
            "no file or database references".into()
        } else {
            refs.iter()
                .map(|r| format!("{:?}: {}", r.kind, r.expression))
                .collect::<Vec<_>>()
                .join("; ")
        },
    }
}

pub fn tsdetect_resource_optimism(test: &TestCase) -> Detection {
    let unchecked: Vec<_> = test
        .resource_refs
        .iter()
        .filter(|r| r.kind == ResourceKind::File && !r.state_checked)
        .collect();
    Detection {
        test_id: test.id.clone(),
        smell: SmellKind::ResourceOptimism,
        detector: DetectorKind::TsDetect,
        flagged: !unchecked.is_empty(),
        evidence: if unchecked.is_empty() {
            "every file reference is state-checked".into()
        } else {
            unchecked
                .iter()
                .map(|r| format!("unchecked file: {}", r.expression))
                .collect::<Vec<_>>()
                .join("; ")
        },
    }
}

/// Flags when cohesion > 0.5, or < 0.5 with `invert`. Tests calling fewer
/// than two production methods are never flagged.
pub fn darts_eager(test: &TestCase, index: &ProductionIndex, invert: bool) -> Detection {
    let cohesion = metrics::conceptual_cohesion(test, index);
    let (flagged, evidence) = match cohesion {
        None => (false, "fewer than two production methods called".to_string()),
        Some(c) => {
            let flagged = if invert { c < 0.5 } else { c > 0.5 };
            (flagged, format!("conceptual cohesion {c:.4}"))
        }
    };
    Detection {
        test_id: test.id.clone(),
        smell: SmellKind::EagerTest,
        detector: DetectorKind::Darts,
        flagged,
        evidence,
    }
}

pub fn teredetect_redundancy<S: AsRef<str>>(
    test: &TestCase,
    suite: &[S],
    cov: &CoverageMap,
    threshold: f64,
) -> Result<Detection> {
    let sr = metrics::suite_redundancy(&test.id, suite, cov)?;
    Ok(Detection {
        test_id: test.id.clone(),
        smell: SmellKind::TestRedundancy,
        detector: DetectorKind::TeReDetect,
        flagged: sr >= threshold,
        evidence: format!("suite redundancy {sr:.4}"),
    })
}

/// Which baselines to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeuristicSet {
    TsDetect,
    Darts,
    TeReDetect,
    All,
}

impl FromStr for HeuristicSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsdetect" => Ok(HeuristicSet::TsDetect),
            "darts" => Ok(HeuristicSet::Darts),
            "teredetect" => Ok(HeuristicSet::TeReDetect),
            "all" => Ok(HeuristicSet::All),
            _ => Err(Error::InvalidArgument(format!("unknown detector `{s}`"))),
        }
    }
}

/// Run the selected baselines over every test. Tests with undefined
/// coverage get an unflagged redundancy detection explaining why.
pub fn run_detectors(
    tests: &[TestCase],
    index: &ProductionIndex,
    cov: &CoverageMap,
    set: HeuristicSet,
    config: &HeuristicConfig,
) -> Vec<Detection> {
    let ts = matches!(set, HeuristicSet::TsDetect | HeuristicSet::All);
    let darts = matches!(set, HeuristicSet::Darts | HeuristicSet::All);
    let tere = matches!(set, HeuristicSet::TeReDetect | HeuristicSet::All);
    let mut out = Vec::new();
    for t in tests {
        if ts {
            out.push(tsdetect_eager(t, index, config.eager_threshold));
            out.push(tsdetect_mystery(t));
            out.push(tsdetect_resource_optimism(t));
        }
        if darts {
            out.push(darts_eager(t, index, config.darts_invert));
        }
        if tere {
            let suite: Vec<&str> = tests
                .iter()
                .filter(|u| u.project == t.project)
                .map(|u| u.id.as_str())
                .collect();
            out.push(
                teredetect_redundancy(t, &suite, cov, config.redundancy_threshold).unwrap_or_else(
                    |e| Detection {
                        test_id: t.id.clone(),
                        smell: SmellKind::TestRedundancy,
                        detector: DetectorKind::TeReDetect,
                        flagged: false,
                        evidence: e.to_string(),
                    },
                ),
            );
        }
    }
    out
}

pub const DETECTION_HEADER: [&str; 5] = ["id", "smell", "detector", "flagged", "evidence"];

pub fn write_detections<W: Write>(detections: &[Detection], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DETECTION_HEADER)?;
    for d in detections {
        w.write_record([
            d.test_id.as_str(),
            d.smell.short_name(),
            d.detector.name(),
            if d.flagged { "1" } else { "0" },
            d.evidence.as_str(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<detections csv>", e))?;
    Ok(())
}

pub fn read_detections<R: Read>(input: R) -> Result<Vec<Detection>> {
    let mut r = csv::Reader::from_reader(input);
    crate::metrics::check_header(r.headers()?, &DETECTION_HEADER)?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::MalformedRow {
            line,
            message: e.to_string(),
        })?;
        let bad = |m: String| Error::MalformedRow { line, message: m };
        let smell: SmellKind = rec[1].parse().map_err(|e: Error| bad(e.to_string()))?;
        let detector: DetectorKind = rec[2].parse().map_err(|e: Error| bad(e.to_string()))?;
        let flagged = match &rec[3] {
            "1" => true,
            "0" => false,
            other => return Err(bad(format!("flagged must be 0 or 1, got `{other}`"))),
        };
        out.push(Detection {
            test_id: rec[0].to_string(),
            smell,
            detector,
            flagged,
            evidence: rec[4].to_string(),
        });
    }
    Ok(out)
}
