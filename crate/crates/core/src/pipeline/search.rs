use serde::{Deserialize, Serialize};

use super::balance::Balancing;
use super::folds::{stratified_folds, training_rows};
use super::balance_adaptive;
use crate::error::{Error, Result};
use crate::learners::{default_search_space, fit, ClassifierKind, HyperparamDraw};
use crate::seed::{derive_seed, derived_rng};
use crate::stats::{mcc, Confusion};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSettings {
    pub iterations: usize,
    pub inner_folds: usize,
    /// Applied to the training part of every inner fold.
    pub balancing: Balancing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub draw: HyperparamDraw,
    /// Mean inner-fold MCC; absent when every fold was skipped.
    pub mcc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best: HyperparamDraw,
    pub best_mcc: f64,
    pub trials: Vec<Trial>,
    pub skipped_folds: usize,
    pub warnings: Vec<String>,
}

/// Random search maximizing mean inner-fold MCC. Every draw is scored on the
/// same inner partition; ties keep the earliest draw.
pub fn random_search(
    kind: ClassifierKind,
    x: &[Vec<f64>],
    y: &[bool],
    settings: &SearchSettings,
    seed: u64,
) -> Result<SearchOutcome> {
    if settings.iterations == 0 {
        return Err(Error::InvalidArgument("search needs at least one iteration".into()));
    }
    let space = default_search_space(kind);
    let mut draw_rng = derived_rng(seed, &["search-draws", kind.name()]);
    let draws: Vec<HyperparamDraw> = (0..settings.iterations).map(|_| space.sample(&mut draw_rng)).collect();

    let positives = y.iter().filter(|&&v| v).count();
    let minority = positives.min(y.len() - positives);
    let k = settings.inner_folds.min(minority).max(2);
    let folds = stratified_folds(y, k, derive_seed(seed, &["search-folds"]));

    let mut warnings = Vec::new();
    let mut skipped = 0;
    let mut usable = Vec::new();
    for (f, test) in folds.iter().enumerate() {
        let train = training_rows(y.len(), test);
        let has_both = |rows: &[usize]| rows.iter().any(|&i| y[i]) && rows.iter().any(|&i| !y[i]);
        if has_both(&train) && has_both(test) {
            usable.push((f, train, test.clone()));
        } else {
            skipped += 1;
            warnings.push(format!("inner fold {f} lacks a class and was skipped"));
        }
    }
    if usable.is_empty() {
        return Err(Error::SearchExhausted);
    }

    // Balanced training parts do not depend on the draw.
    let prepared: Vec<_> = usable
        .iter()
        .map(|(f, train, test)| {
            let tx: Vec<Vec<f64>> = train.iter().map(|&i| x[i].clone()).collect();
            let ty: Vec<bool> = train.iter().map(|&i| y[i]).collect();
            let bal_seed = derive_seed(seed, &["search-balance", &f.to_string()]);
            (*f, balance_adaptive(&tx, &ty, settings.balancing, bal_seed).0, test)
        })
        .collect();

    let mut trials = Vec::with_capacity(draws.len());
    for (t, draw) in draws.into_iter().enumerate() {
        let mut total = 0.0;
        for (f, balanced, test) in &prepared {
            let fit_seed = derive_seed(seed, &["search-fit", &t.to_string(), &f.to_string()]);
            let clf = fit(kind, &balanced.x, &balanced.y, &draw, fit_seed)?;
            let c = Confusion::from_pairs(test.iter().map(|&i| (clf.predict(&x[i]).expect("arity checked"), y[i])));
            total += mcc(c);
        }
        trials.push(Trial {
            draw,
            mcc: Some(total / usable.len() as f64),
        });
    }

    let (best_idx, best_mcc) = trials
        .iter()
        .enumerate()
        .filter_map(|(i, t)| t.mcc.map(|m| (i, m)))
        .fold(None, |acc: Option<(usize, f64)>, (i, m)| match acc {
            Some((_, bm)) if m <= bm => acc,
            _ => Some((i, m)),
        })
        .ok_or(Error::SearchExhausted)?;
    Ok(SearchOutcome {
        best: trials[best_idx].draw.clone(),
        best_mcc,
        trials,
        skipped_folds: skipped,
        warnings,
    })
}
