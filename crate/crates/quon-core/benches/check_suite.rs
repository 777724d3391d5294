use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use quon_core::exec::Exec;
use quon_core::suite::{run_all, SuiteConfig};

fn bench_suite(c: &mut Criterion) {
    let mut group = c.benchmark_group("check-suite");
    group.sample_size(10);
    for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
        group.bench_with_input(BenchmarkId::new("dims-2-3", name), &exec, |b, &exec| {
            let config = SuiteConfig {
                dims: vec![2, 3],
                teleport_trials: 5,
                soundness_contexts: 20,
                exec,
                ..SuiteConfig::default()
            };
            b.iter(|| run_all(&config));
        });
    }
    group.finish();
}

criterion_group!(benches, bench_suite);
criterion_main!(benches);
