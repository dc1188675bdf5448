use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use j1j2::parallel::Execution;
use j1j2::sweep::{run_sweep, SweepConfig};
use j1j2::{assemble_low_spectrum, ChainSpec, SolverConfig};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn sector_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectrum_n12");
    group.sample_size(10);
    let spec = ChainSpec::new(12, 0.3).unwrap();
    for (name, execution) in MODES {
        let cfg = SolverConfig { execution, ..SolverConfig::default() };
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| assemble_low_spectrum(&spec, 2, cfg).unwrap())
        });
    }
    group.finish();
}

fn mini_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep_n8");
    group.sample_size(10);
    let spec = ChainSpec::new(8, 0.0).unwrap();
    for (name, execution) in MODES {
        let cfg = SweepConfig {
            steps: 21,
            discord: false,
            solver: SolverConfig { execution, ..SolverConfig::default() },
            ..SweepConfig::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| b.iter(|| run_sweep(&spec, cfg).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, sector_solve, mini_sweep);
criterion_main!(benches);
