use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate, Balancing, PipelineConfig, Validation};
use crate::dataset::Corpus;
use crate::error::{Error, Result};
use crate::learners::ClassifierKind;
use crate::smell::SmellKind;
use crate::stats::EvaluationReport;

/// Feature selection x balancing x classifier x validation around `base`;
/// the remaining fields (smell, seed, tuning, search budget) come from it.
pub fn default_grid(base: &PipelineConfig) -> Vec<PipelineConfig> {
    let mut grid = Vec::with_capacity(216);
    for feature_selection in [true, false] {
        for balancing in Balancing::ALL {
            for classifier in ClassifierKind::ALL {
                for validation in [Validation::WithinProject, Validation::CrossProject] {
                    grid.push(PipelineConfig {
                        feature_selection,
                        balancing,
                        classifier,
                        validation,
                        ..base.clone()
                    });
                }
            }
        }
    }
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationEntry {
    pub config_id: String,
    pub config: PipelineConfig,
    pub report: Option<EvaluationReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedConfig {
    pub config_id: String,
    pub mcc: f64,
    pub f_measure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmellRanking {
    pub smell: SmellKind,
    /// Best MCC first; ties by config id.
    pub ranked: Vec<RankedConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub entries: Vec<AblationEntry>,
    pub rankings: Vec<SmellRanking>,
}

/// Evaluates every configuration. A failing configuration is recorded with
/// its error and the run continues.
pub fn ablation(corpus: &Corpus, grid: &[PipelineConfig]) -> Result<AblationTable> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("ablation grid is empty".into()));
    }
    let entries: Vec<AblationEntry> = grid
        .par_iter()
        .map(|config| {
            let (report, error) = match evaluate(corpus, config) {
                Ok(e) => (Some(e.report), None),
                Err(e) => {
                    log::warn!("{}: {e}", config.id());
                    (None, Some(e.to_string()))
                }
            };
            AblationEntry {
                config_id: config.id(),
                config: config.clone(),
                report,
                error,
            }
        })
        .collect();

    let mut by_smell: BTreeMap<SmellKind, Vec<RankedConfig>> = BTreeMap::new();
    for e in &entries {
        if let Some(r) = &e.report {
            by_smell.entry(e.config.smell).or_default().push(RankedConfig {
                config_id: e.config_id.clone(),
                mcc: r.mcc,
                f_measure: r.f_measure,
            });
        }
    }
    let rankings = by_smell
        .into_iter()
        .map(|(smell, mut ranked)| {
            ranked.sort_by(|a, b| b.mcc.total_cmp(&a.mcc).then_with(|| a.config_id.cmp(&b.config_id)));
            ranked.dedup_by(|a, b| a.config_id == b.config_id);
            SmellRanking { smell, ranked }
        })
        .collect();
    Ok(AblationTable { entries, rankings })
}
