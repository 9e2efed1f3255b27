use criterion::{criterion_group, criterion_main, Criterion};
use lunar_logistics::scenario::{load_scenario, run_sweep, run_sweep_sequential, shipped};

fn sweeps(c: &mut Criterion) {
    let config = load_scenario(shipped("fig3_sweep").unwrap()).unwrap();
    let spec = config.sweeps[0].clone();
    let mut group = c.benchmark_group("productivity_sweep");
    group.sample_size(10);
    // without the `parallel` feature both entries run on one thread
    group.bench_function("run_sweep", |b| b.iter(|| run_sweep(&config, &spec).unwrap()));
    group.bench_function("sequential", |b| b.iter(|| run_sweep_sequential(&config, &spec).unwrap()));
    group.finish();
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
