use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use trap_core::runner::{sweep, Execution, RunControls, Scenario};

fn zero_range_points() -> Vec<Scenario> {
    [0.5, 1.0, 2.0, 3.0]
        .iter()
        .flat_map(|&nu| [1.0, 0.5].map(|v| Scenario::zero_range(nu, v, 1.0)))
        .collect()
}

fn bench_sweep(c: &mut Criterion) {
    let points = zero_range_points();
    let ctl = RunControls {
        dx_tol: None,
        max_t_growths: 0,
        ..Default::default()
    };
    let mut group = c.benchmark_group("zero_range_sweep");
    group.sample_size(10);
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| sweep(&points, &ctl, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_sweep);
criterion_main!(benches);
