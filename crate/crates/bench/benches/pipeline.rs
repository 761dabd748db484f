//! Batch scoring, evaluation, and aggregation benchmarks.

use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use std::hint::black_box;

use discipline_bench::workload;
use discipline_core::evaluation::{brier_score, calibration_curve};
use discipline_core::knn::{score_dataset, IndexSet, NeighborIndex};
use discipline_core::{aggregate, PitchCategory, ScalingMode};
use discipline_core::aggregate::Role;

fn bench_batch_scoring(c: &mut Criterion) {
    let data = workload(100_000, 10_000);
    let mut set = IndexSet::new();
    for category in PitchCategory::ALL {
        let members: Vec<_> = data
            .train
            .iter()
            .filter(|b| b.category == category)
            .cloned()
            .collect();
        set.insert(NeighborIndex::build(&members, category, ScalingMode::Zscore, 200).unwrap());
    }

    let mut group = c.benchmark_group("batch_score");
    group.sample_size(10);
    group.throughput(Throughput::Elements(data.queries.len() as u64));
    group.bench_function("k200", |b| {
        b.iter(|| score_dataset(&set, &data.queries, None).unwrap())
    });
    group.finish();
}

fn bench_evaluation(c: &mut Criterion) {
    let data = workload(0, 100_000);
    let predictions = data.query_truth.clone();
    let outcomes: Vec<bool> = data.queries.iter().map(|b| b.label.is_swing()).collect();

    let mut group = c.benchmark_group("evaluation");
    group.throughput(Throughput::Elements(predictions.len() as u64));
    group.bench_function("brier_100k", |b| {
        b.iter(|| brier_score(black_box(&predictions), black_box(&outcomes)).unwrap())
    });
    group.bench_function("calibration_100k", |b| {
        b.iter(|| calibration_curve(black_box(&predictions), black_box(&outcomes), 10).unwrap())
    });
    group.finish();
}

fn bench_aggregation(c: &mut Criterion) {
    let data = workload(20_000, 100_000);
    let mut set = IndexSet::new();
    for category in PitchCategory::ALL {
        let members: Vec<_> = data
            .train
            .iter()
            .filter(|b| b.category == category)
            .cloned()
            .collect();
        set.insert(NeighborIndex::build(&members, category, ScalingMode::Zscore, 100).unwrap());
    }
    let scored = score_dataset(&set, &data.queries, Some(20)).unwrap();

    let mut group = c.benchmark_group("aggregate");
    group.sample_size(20);
    group.throughput(Throughput::Elements(scored.len() as u64));
    group.bench_function("summarize_100k", |b| {
        b.iter(|| aggregate::summarize(black_box(&scored), Role::Batter))
    });
    group.finish();
}

criterion_group!(benches, bench_batch_scoring, bench_evaluation, bench_aggregation);
criterion_main!(benches);
