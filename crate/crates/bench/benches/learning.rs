use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use smellml_bench::matrix;
use smellml_core::dataset::synthetic_corpus;
use smellml_core::learners::fit;
use smellml_core::pipeline::{balance, evaluate, MinMaxScaler};
use smellml_core::{Balancing, ClassifierKind, HyperparamDraw, PipelineConfig, SmellKind};

fn bench_fit(c: &mut Criterion) {
    let corpus = synthetic_corpus(2, 200, 0.3, false, 1);
    let (x, y) = matrix(&corpus, SmellKind::EagerTest);
    let mut group = c.benchmark_group("learners/fit");
    for kind in ClassifierKind::ALL {
        group.bench_with_input(BenchmarkId::from_parameter(kind), &kind, |b, &kind| {
            b.iter(|| fit(kind, &x, &y, &HyperparamDraw::default(), 7).unwrap())
        });
    }
    group.finish();
}

fn bench_balance(c: &mut Criterion) {
    let corpus = synthetic_corpus(2, 200, 0.2, false, 2);
    let (x, y) = matrix(&corpus, SmellKind::EagerTest);
    let scaler = MinMaxScaler::fit(&x);
    let x: Vec<Vec<f64>> = x.iter().map(|r| scaler.apply(r)).collect();
    let mut group = c.benchmark_group("pipeline/balance");
    for strategy in Balancing::ALL {
        group.bench_with_input(BenchmarkId::from_parameter(strategy.name()), &strategy, |b, &s| {
            b.iter(|| balance(&x, &y, s, 3).unwrap())
        });
    }
    group.finish();
}

fn bench_evaluate(c: &mut Criterion) {
    let corpus = synthetic_corpus(3, 60, 0.3, true, 4);
    let config = PipelineConfig {
        classifier: ClassifierKind::DecisionTree,
        balancing: Balancing::Smote,
        search_iterations: 3,
        outer_folds: 5,
        seed: 5,
        ..PipelineConfig::default()
    };
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);
    group.bench_function("evaluate_within", |b| b.iter(|| evaluate(&corpus, &config).unwrap()));
    group.finish();
}

criterion_group!(benches, bench_fit, bench_balance, bench_evaluate);
criterion_main!(benches);
