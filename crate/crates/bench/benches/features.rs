use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use donut_bench::desk_series;
use donut_core::model_pool::{fit_forecast, forecast_all};
use donut_core::stat_features::extract_stat_features;
use donut_core::ModelId;
use std::hint::black_box;

fn pool_and_features(c: &mut Criterion) {
    let corpus = desk_series(40);
    let ts = corpus.iter().max_by_key(|t| t.values.len()).expect("series");
    let split = ts.split().unwrap();
    let (m, h) = (ts.period.m, ts.period.h);

    let mut g = c.benchmark_group("model_pool");
    g.bench_function("forecast_all", |b| {
        b.iter(|| forecast_all(&ts.id, black_box(&split.train), m, h))
    });
    for model in [ModelId::Theta, ModelId::ArAic, ModelId::LgtPoint, ModelId::Quantile99] {
        g.bench_with_input(BenchmarkId::new("fit_forecast", model.name()), &model, |b, &model| {
            b.iter(|| fit_forecast(model, black_box(&split.train), m, h))
        });
    }
    g.finish();

    c.bench_function("stat_features/extract", |b| {
        b.iter(|| extract_stat_features(black_box(&split.train), m))
    });
}

criterion_group!(benches, pool_and_features);
criterion_main!(benches);
