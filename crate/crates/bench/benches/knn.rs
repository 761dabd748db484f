//! Index construction and nearest-neighbor query benchmarks.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use discipline_bench::workload;
use discipline_core::knn::NeighborIndex;
use discipline_core::{BallRecord, PitchCategory, ScalingMode};

fn fastballs(train: usize) -> Vec<BallRecord> {
    workload(train, 0)
        .train
        .into_iter()
        .filter(|b| b.category == PitchCategory::Fastball)
        .collect()
}

fn bench_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("index_build");
    group.sample_size(10);
    for train in [50_000usize, 200_000] {
        let balls = fastballs(train);
        group.throughput(Throughput::Elements(balls.len() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(balls.len()), &balls, |b, balls| {
            b.iter(|| {
                NeighborIndex::build(balls, PitchCategory::Fastball, ScalingMode::Zscore, 200)
                    .unwrap()
            })
        });
    }
    group.finish();
}

fn bench_query(c: &mut Criterion) {
    let data = workload(200_000, 1_000);
    let train = fastballs(200_000);
    let index =
        NeighborIndex::build(&train, PitchCategory::Fastball, ScalingMode::Zscore, 200).unwrap();
    let queries: Vec<[f64; 6]> = data
        .queries
        .iter()
        .map(|b| b.features)
        .take(1_000)
        .collect();

    let mut group = c.benchmark_group("knn_query");
    group.throughput(Throughput::Elements(queries.len() as u64));
    for k in [10usize, 200] {
        group.bench_with_input(BenchmarkId::new("k", k), &k, |b, &k| {
            b.iter(|| {
                for q in &queries {
                    black_box(index.estimate(q, k).unwrap());
                }
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_build, bench_query);
criterion_main!(benches);
