//! Sweep throughput: a batch of independent traces replayed sequentially
//! versus across the thread pool, plus single-trace replay for a baseline.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use hypercover_harness::gen::{generate, GenOptions, TraceKind};
use hypercover_harness::runner::{run_many_sequential, run_trace, RunOptions};
use hypercover_harness::trace::Trace;

fn batch(count: u64) -> Vec<Trace> {
    (0..count)
        .map(|seed| {
            generate(&GenOptions {
                n: 256,
                f: 3,
                updates: 2_000,
                seed,
                kind: TraceKind::RandomChurn,
                window: None,
            })
            .unwrap()
        })
        .collect()
}

fn bench_sweep(c: &mut Criterion) {
    let traces = batch(8);
    let updates: u64 = traces.iter().map(|t| t.updates.len() as u64).sum();
    let opts = RunOptions::default();

    let mut group = c.benchmark_group("sweep");
    group.throughput(Throughput::Elements(updates));
    group.bench_function(BenchmarkId::new("sequential", traces.len()), |b| {
        b.iter(|| run_many_sequential(&traces, &opts).unwrap())
    });
    #[cfg(feature = "parallel")]
    group.bench_function(BenchmarkId::new("parallel", traces.len()), |b| {
        b.iter(|| hypercover_harness::runner::run_many_parallel(&traces, &opts, 0).unwrap())
    });
    group.finish();
}

fn bench_single(c: &mut Criterion) {
    let trace = generate(&GenOptions {
        n: 4_096,
        f: 3,
        updates: 20_000,
        seed: 7,
        kind: TraceKind::SlidingWindow,
        window: None,
    })
    .unwrap();
    let opts = RunOptions::default();

    let mut group = c.benchmark_group("single");
    group.throughput(Throughput::Elements(trace.updates.len() as u64));
    group.bench_function("sliding-window", |b| {
        b.iter(|| run_trace(&trace, &opts).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_sweep, bench_single);
criterion_main!(benches);
