use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use itboost::boosting::{train, BoostConfig, Loss, TrustMode};
use itboost::complexity::Encoding;
use itboost_bench::task;

fn modes(c: &mut Criterion) {
    let data = task(400, 1);
    let mut group = c.benchmark_group("train_400x10_m50");
    group.sample_size(10);
    for trust in [TrustMode::Disabled, TrustMode::MagnitudeOnly, TrustMode::Enabled] {
        let config = BoostConfig {
            iterations: 50,
            loss: Loss::Squared,
            trust,
            ..BoostConfig::default()
        };
        group.bench_function(BenchmarkId::from_parameter(trust), |b| {
            b.iter(|| train(black_box(&data), &config).unwrap())
        });
    }
    group.finish();
}

fn encodings(c: &mut Criterion) {
    let data = task(400, 2);
    let mut group = c.benchmark_group("encoding_m100");
    group.sample_size(10);
    for encoding in [Encoding::BinarySign, Encoding::BinaryDelta, Encoding::Quantized] {
        for incremental_lz in [false, true] {
            let config = BoostConfig {
                encoding,
                incremental_lz,
                loss: Loss::Squared,
                ..BoostConfig::default()
            };
            let id = format!("{encoding}/{}", if incremental_lz { "incremental" } else { "rescan" });
            group.bench_function(id, |b| b.iter(|| train(black_box(&data), &config).unwrap()));
        }
    }
    group.finish();
}

criterion_group!(benches, modes, encodings);
criterion_main!(benches);
