use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use itboost::complexity::{lz76_complexity, Lz76Parser};
use itboost_bench::random_symbols;

fn batch_vs_incremental(c: &mut Criterion) {
    let mut group = c.benchmark_group("lz76");
    for len in [64usize, 256, 1024] {
        let s = random_symbols(len, 2, 7);
        group.throughput(Throughput::Elements(len as u64));
        group.bench_with_input(BenchmarkId::new("batch", len), &s, |b, s| {
            b.iter(|| lz76_complexity(black_box(s)))
        });
        group.bench_with_input(BenchmarkId::new("incremental", len), &s, |b, s| {
            b.iter(|| {
                let mut p = Lz76Parser::new();
                for &x in s {
                    p.push(x);
                }
                p.complexity()
            })
        });
    }
    group.finish();
}

/// Complexity of every prefix: what training needs after each iteration.
fn every_prefix(c: &mut Criterion) {
    let mut group = c.benchmark_group("lz76_prefixes");
    for len in [100usize, 200, 400] {
        let s = random_symbols(len, 2, 11);
        group.bench_with_input(BenchmarkId::new("rescan", len), &s, |b, s| {
            b.iter(|| {
                (1..=s.len())
                    .map(|m| lz76_complexity(black_box(&s[..m])))
                    .sum::<usize>()
            })
        });
        group.bench_with_input(BenchmarkId::new("incremental", len), &s, |b, s| {
            b.iter(|| {
                let mut p = Lz76Parser::new();
                s.iter().map(|&x| p.push(black_box(x))).sum::<usize>()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, batch_vs_incremental, every_prefix);
criterion_main!(benches);
