//! Criterion benchmarks for `smellml-core`; see `benches/`.
//!
//! Run with `cargo bench -p smellml-bench`.

use smellml_core::{Corpus, SmellKind};

/// Feature matrix and labels for one smell, in corpus order.
pub fn matrix(corpus: &Corpus, smell: SmellKind) -> (Vec<Vec<f64>>, Vec<bool>) {
    corpus
        .instances()
        .map(|i| (i.features.to_array().to_vec(), i.labels.get(smell)))
        .unzip()
}
