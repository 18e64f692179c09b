//! Evaluation metrics, evaluation reports and paired comparison statistics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::smell::SmellKind;

/// Largest sample for which the Wilcoxon null distribution is enumerated.
pub const WILCOXON_EXACT_MAX_N: usize = 25;

/// F-measure above which a detector is considered good enough for in-vivo use.
pub const GATE_THRESHOLD: f64 = 0.70;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn record(&mut self, predicted: bool, truth: bool) {
        match (predicted, truth) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fn_ += 1,
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (bool, bool)>) -> Self {
        let mut c = Confusion::default();
        for (p, t) in pairs {
            c.record(p, t);
        }
        c
    }
}

impl std::ops::Add for Confusion {
    type Output = Confusion;

    fn add(self, o: Confusion) -> Confusion {
        Confusion {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            tn: self.tn + o.tn,
            fn_: self.fn_ + o.fn_,
        }
    }
}

impl std::iter::Sum for Confusion {
    fn sum<I: Iterator<Item = Confusion>>(iter: I) -> Confusion {
        iter.fold(Confusion::default(), |a, b| a + b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub mcc: f64,
}

/// Undefined ratios are reported as 0; MCC is 0 when any marginal is empty.
pub fn classification_metrics(c: Confusion) -> Result<Metrics> {
    if c.total() == 0 {
        return Err(Error::InvalidArgument("confusion counts are all zero".into()));
    }
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    let (tp, fp, tn, fn_) = (c.tp as f64, c.fp as f64, c.tn as f64, c.fn_ as f64);
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f_measure = ratio(2.0 * precision * recall, precision + recall);
    let den = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    let mcc = if den > 0.0 {
        ((tp * tn - fp * fn_) / den.sqrt()).clamp(-1.0, 1.0)
    } else {
        0.0
    };
    Ok(Metrics {
        precision,
        recall,
        f_measure,
        mcc,
    })
}

pub fn mcc(c: Confusion) -> f64 {
    classification_metrics(c).map(|m| m.mcc).unwrap_or(0.0)
}

/// Average precision: items are visited in descending score order and each
/// group of equal scores enters at once.
pub fn auc_pr(scored: &[(f64, bool)]) -> Result<f64> {
    let positives = scored.iter().filter(|(_, t)| *t).count();
    if positives == 0 || positives == scored.len() {
        return Err(Error::InvalidArgument("AUC-PR needs both classes".into()));
    }
    if scored.iter().any(|(s, _)| s.is_nan()) {
        return Err(Error::InvalidArgument("AUC-PR scores contain NaN".into()));
    }
    let mut sorted = scored.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (mut tp, mut seen, mut ap) = (0usize, 0usize, 0.0);
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        let mut group_pos = 0;
        while j < sorted.len() && sorted[j].0 == sorted[i].0 {
            group_pos += sorted[j].1 as usize;
            j += 1;
        }
        tp += group_pos;
        seen += j - i;
        ap += group_pos as f64 / positives as f64 * (tp as f64 / seen as f64);
        i = j;
    }
    Ok(ap)
}

/// Ranks of `values` (1-based), ties receive their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

struct SignedRanks {
    ranks: Vec<f64>,
    positive: Vec<bool>,
}

fn signed_ranks(a: &[f64], b: &[f64]) -> Result<SignedRanks> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    if diffs.is_empty() {
        return Err(Error::DegenerateSample);
    }
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(Error::InvalidArgument("non-finite paired difference".into()));
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    Ok(SignedRanks {
        ranks: average_ranks(&abs),
        positive: diffs.iter().map(|d| *d > 0.0).collect(),
    })
}

/// Two-sided Wilcoxon signed-rank p-value: exact for up to
/// [`WILCOXON_EXACT_MAX_N`] nonzero differences, normal approximation above.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<f64> {
    let sr = signed_ranks(a, b)?;
    Ok(if sr.ranks.len() <= WILCOXON_EXACT_MAX_N {
        exact_p(&sr)
    } else {
        normal_p(&sr)
    })
}

pub fn wilcoxon_exact(a: &[f64], b: &[f64]) -> Result<f64> {
    Ok(exact_p(&signed_ranks(a, b)?))
}

pub fn wilcoxon_normal(a: &[f64], b: &[f64]) -> Result<f64> {
    Ok(normal_p(&signed_ranks(a, b)?))
}

fn exact_p(sr: &SignedRanks) -> f64 {
    // Averaged ranks are multiples of 1/2, so doubled ranks are integers.
    let doubled: Vec<usize> = sr.ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max: usize = doubled.iter().sum();
    let mut counts = vec![0f64; max + 1];
    counts[0] = 1.0;
    for &r in &doubled {
        for s in (r..=max).rev() {
            counts[s] += counts[s - r];
        }
    }
    let total = 2f64.powi(doubled.len() as i32);
    let w: usize = doubled.iter().zip(&sr.positive).filter(|(_, p)| **p).map(|(r, _)| r).sum();
    let lower: f64 = counts[..=w].iter().sum::<f64>() / total;
    let upper: f64 = counts[w..].iter().sum::<f64>() / total;
    (2.0 * lower.min(upper)).min(1.0)
}

fn normal_p(sr: &SignedRanks) -> f64 {
    let n = sr.ranks.len() as f64;
    let w: f64 = sr.ranks.iter().zip(&sr.positive).filter(|(_, p)| **p).map(|(r, _)| r).sum();
    let mean = n * (n + 1.0) / 4.0;
    let mut ties: BTreeMap<u64, f64> = BTreeMap::new();
    for r in &sr.ranks {
        *ties.entry(r.to_bits()).or_default() += 1.0;
    }
    let tie_term: f64 = ties.values().map(|t| t * t * t - t).sum::<f64>() / 48.0;
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w - mean).abs() - 0.5).max(0.0) / var.sqrt();
    // Two-sided tail: 2 * (1 - Phi(z)) = erfc(z / sqrt 2).
    erfc(z / std::f64::consts::SQRT_2).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Magnitude {
    Negligible,
    Small,
    Medium,
    Large,
}

impl Magnitude {
    pub fn of(delta: f64) -> Magnitude {
        match delta.abs() {
            d if d < 0.147 => Magnitude::Negligible,
            d if d < 0.33 => Magnitude::Small,
            d if d < 0.474 => Magnitude::Medium,
            _ => Magnitude::Large,
        }
    }
}

pub fn cliffs_delta(a: &[f64], b: &[f64]) -> Result<(f64, Magnitude)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("Cliff's delta needs two nonempty samples".into()));
    }
    let mut sorted_b = b.to_vec();
    sorted_b.sort_by(f64::total_cmp);
    let mut dominance: i64 = 0;
    for x in a {
        let below = sorted_b.partition_point(|v| v < x) as i64;
        let not_above = sorted_b.partition_point(|v| v <= x) as i64;
        let above = sorted_b.len() as i64 - not_above;
        dominance += below - above;
    }
    let delta = dominance as f64 / (a.len() * b.len()) as f64;
    Ok((delta, Magnitude::of(delta)))
}

pub fn gate_in_vivo(f_measure: f64) -> bool {
    f_measure > GATE_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldEntry {
    pub project: String,
    pub fold: usize,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl FoldEntry {
    pub fn confusion(&self) -> Confusion {
        Confusion {
            tp: self.tp,
            fp: self.fp,
            tn: self.tn,
            fn_: self.fn_,
        }
    }
}

/// One detector's results for one smell. Aggregate metrics are computed on
/// the confusion counts pooled over all folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub smell: SmellKind,
    pub config: serde_json::Value,
    pub folds: Vec<FoldEntry>,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub mcc: f64,
    /// Absent when the pooled predictions contain a single class.
    pub auc_pr: Option<f64>,
    pub gate_in_vivo: bool,
    pub fold_mean_mcc: f64,
    pub project_mcc: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl EvaluationReport {
    /// `scored` holds (score, truth) for every tested instance.
    pub fn build(
        smell: SmellKind,
        config: serde_json::Value,
        folds: Vec<FoldEntry>,
        scored: &[(f64, bool)],
        warnings: Vec<String>,
    ) -> Result<Self> {
        let pooled: Confusion = folds.iter().map(FoldEntry::confusion).sum();
        let m = classification_metrics(pooled)?;
        let fold_mean_mcc = folds.iter().map(|f| mcc(f.confusion())).sum::<f64>() / folds.len() as f64;
        let mut per_project: BTreeMap<String, Confusion> = BTreeMap::new();
        for f in &folds {
            let e = per_project.entry(f.project.clone()).or_default();
            *e = *e + f.confusion();
        }
        Ok(EvaluationReport {
            smell,
            config,
            precision: m.precision,
            recall: m.recall,
            f_measure: m.f_measure,
            mcc: m.mcc,
            auc_pr: auc_pr(scored).ok(),
            gate_in_vivo: gate_in_vivo(m.f_measure),
            fold_mean_mcc,
            project_mcc: per_project.into_iter().map(|(p, c)| (p, mcc(c))).collect(),
            folds,
            warnings,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub smell: SmellKind,
    pub a: String,
    pub b: String,
    pub projects: Vec<String>,
    pub mcc_a: Vec<f64>,
    pub mcc_b: Vec<f64>,
    pub wilcoxon_p: f64,
    pub cliffs_delta: f64,
    pub magnitude: Magnitude,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Pairs the per-project MCC of two reports on the same smell.
pub fn compare_approaches(
    a_name: &str,
    a: &EvaluationReport,
    b_name: &str,
    b: &EvaluationReport,
) -> Result<ComparisonResult> {
    if a.smell != b.smell {
        return Err(Error::InvalidArgument(format!(
            "cannot compare {} with {}",
            a.smell, b.smell
        )));
    }
    let pa: Vec<&String> = a.project_mcc.keys().collect();
    let pb: Vec<&String> = b.project_mcc.keys().collect();
    if pa != pb {
        let only: Vec<&str> = pa
            .iter()
            .filter(|p| !pb.contains(p))
            .chain(pb.iter().filter(|p| !pa.contains(p)))
            .map(|p| p.as_str())
            .collect();
        return Err(Error::ProjectMismatch(only.join(", ")));
    }
    let mcc_a: Vec<f64> = a.project_mcc.values().copied().collect();
    let mcc_b: Vec<f64> = b.project_mcc.values().copied().collect();
    let (wilcoxon_p, note) = match wilcoxon_signed_rank(&mcc_a, &mcc_b) {
        Ok(p) => (p, None),
        Err(Error::DegenerateSample) => (1.0, Some("no difference".to_string())),
        Err(e) => return Err(e),
    };
    let (cliffs_delta, magnitude) = cliffs_delta(&mcc_a, &mcc_b)?;
    Ok(ComparisonResult {
        smell: a.smell,
        a: a_name.to_string(),
        b: b_name.to_string(),
        projects: pa.into_iter().cloned().collect(),
        mcc_a,
        mcc_b,
        wilcoxon_p,
        cliffs_delta,
        magnitude,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conf(tp: usize, fp: usize, tn: usize, fn_: usize) -> Confusion {
        Confusion { tp, fp, tn, fn_ }
    }

    #[test]
    fn metrics_examples() {
        let m = classification_metrics(conf(10, 0, 10, 0)).unwrap();
        assert_eq!((m.precision, m.recall, m.f_measure, m.mcc), (1.0, 1.0, 1.0, 1.0));
        let m = classification_metrics(conf(0, 10, 0, 10)).unwrap();
        assert_eq!((m.precision, m.recall, m.f_measure, m.mcc), (0.0, 0.0, 0.0, -1.0));
        let m = classification_metrics(conf(1, 1, 2, 0)).unwrap();
        assert!((m.mcc - 2.0 / 12f64.sqrt()).abs() < 1e-12);
        assert!(classification_metrics(conf(0, 0, 0, 0)).is_err());
        assert_eq!(classification_metrics(conf(0, 0, 5, 0)).unwrap().mcc, 0.0);
    }

    #[test]
    fn auc_pr_examples() {
        let perfect = [(0.9, true), (0.8, true), (0.3, false), (0.1, false)];
        assert_eq!(auc_pr(&perfect).unwrap(), 1.0);
        let ties = [(0.5, true), (0.5, false), (0.5, true), (0.5, false)];
        assert!((auc_pr(&ties).unwrap() - 0.5).abs() < 1e-12);
        let last = [(0.9, false), (0.8, false), (0.7, false), (0.6, false), (0.1, true)];
        assert!((auc_pr(&last).unwrap() - 0.2).abs() < 1e-12);
        assert!(auc_pr(&[(0.3, true)]).is_err());
    }

    #[test]
    fn auc_pr_ignores_monotone_transforms() {
        let s: [(f64, bool); 6] = [(0.1, false), (0.4, true), (0.35, false), (0.8, true), (0.4, false), (0.9, false)];
        let t: Vec<(f64, bool)> = s.iter().map(|&(v, y)| ((3.0 * v).exp(), y)).collect();
        assert_eq!(auc_pr(&s).unwrap(), auc_pr(&t).unwrap());
    }

    #[test]
    fn wilcoxon_examples() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let b = [0.0; 6];
        assert!((wilcoxon_signed_rank(&a, &b).unwrap() - 2.0 / 64.0).abs() < 1e-15);
        assert!(matches!(wilcoxon_signed_rank(&a, &a), Err(Error::DegenerateSample)));
        assert!(wilcoxon_signed_rank(&a, &b[..3]).is_err());
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn cliffs_examples() {
        assert_eq!(cliffs_delta(&[5.0, 6.0], &[1.0, 2.0]).unwrap(), (1.0, Magnitude::Large));
        assert_eq!(cliffs_delta(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), (0.0, Magnitude::Negligible));
        assert!(cliffs_delta(&[], &[1.0]).is_err());
        assert_eq!(Magnitude::of(0.147), Magnitude::Small);
        assert_eq!(Magnitude::of(-0.5), Magnitude::Large);
        assert_eq!(Magnitude::of(0.4), Magnitude::Medium);
    }

    #[test]
    fn gate_boundary() {
        assert!(!gate_in_vivo(0.70));
        assert!(gate_in_vivo(0.7000001));
        assert!(!gate_in_vivo(0.5));
    }

    fn report(values: &[(&str, Confusion)]) -> EvaluationReport {
        let folds = values
            .iter()
            .map(|(p, c)| FoldEntry {
                project: p.to_string(),
                fold: 0,
                tp: c.tp,
                fp: c.fp,
                tn: c.tn,
                fn_: c.fn_,
            })
            .collect();
        EvaluationReport::build(SmellKind::EagerTest, serde_json::Value::Null, folds, &[], vec![]).unwrap()
    }

    #[test]
    fn report_pools_counts_and_sets_gate() {
        let r = report(&[("a", conf(8, 1, 9, 2)), ("b", conf(2, 0, 5, 0))]);
        assert_eq!(r.precision, 10.0 / 11.0);
        assert_eq!(r.recall, 10.0 / 12.0);
        assert!(r.gate_in_vivo);
        assert_eq!(r.project_mcc.len(), 2);
        assert_eq!(r.project_mcc["b"], 1.0);
        assert!(r.auc_pr.is_none());
        let json = serde_json::to_value(&r).unwrap();
        assert!(json["folds"][0]["fn"].is_number());
        assert_eq!(json["smell"], "eager_test");
    }

    #[test]
    fn comparing_identical_reports_is_degenerate() {
        let r = report(&[("a", conf(8, 1, 9, 2)), ("b", conf(2, 0, 5, 0))]);
        let c = compare_approaches("x", &r, "y", &r).unwrap();
        assert_eq!(c.wilcoxon_p, 1.0);
        assert_eq!(c.cliffs_delta, 0.0);
        assert_eq!(c.note.as_deref(), Some("no difference"));
        let other = report(&[("a", conf(8, 1, 9, 2))]);
        assert!(matches!(compare_approaches("x", &r, "y", &other), Err(Error::ProjectMismatch(_))));
    }
}
