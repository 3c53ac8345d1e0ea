use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use donut_bench::{desk_series, oracle_instances};
use donut_core::oracle::{greedy_build, optimal_weights};
use donut_core::ModelId;
use std::hint::black_box;

fn simplex(c: &mut Criterion) {
    let instances = oracle_instances(&desk_series(60));
    let monthly = instances.iter().max_by_key(|i| i.actual.len()).expect("instances");
    let rows = monthly.restrict(&ModelId::ALL);

    let mut g = c.benchmark_group("oracle");
    g.bench_function("optimal_weights/14 models", |b| {
        b.iter(|| optimal_weights(black_box(&rows), black_box(&monthly.actual)).unwrap())
    });
    g.bench_function("optimal_weights/corpus of 60", |b| {
        b.iter(|| {
            for i in &instances {
                black_box(optimal_weights(&i.restrict(&ModelId::ALL), &i.actual).unwrap());
            }
        })
    });
    g.sample_size(10);
    g.bench_function("greedy_build/60 series", |b| {
        b.iter_batched(|| instances.clone(), |i| greedy_build(&i, &ModelId::ALL).unwrap(), BatchSize::LargeInput)
    });
    g.finish();
}

criterion_group!(benches, simplex);
criterion_main!(benches);
