//! Sequential against data-parallel shift sweeps.

use std::hint::black_box;

use confine_core::exec::Execution;
use confine_core::potential::{ConfinementDomain, PotentialKind, PotentialSpec};
use confine_core::report::{geometric_grid, sweep, ReportOptions, ShiftProblem};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn shift_sweep(c: &mut Criterion) {
    let problem = ShiftProblem {
        potential: PotentialSpec::from_expr(PotentialKind::Line, "x^2 + x^4").unwrap(),
        domain: ConfinementDomain::interval(-0.9, 1.1).unwrap(),
        m: 1,
        nu: None,
    };
    let opts = ReportOptions::default();
    let mut group = c.benchmark_group("shift-sweep");
    group.sample_size(10);
    for points in [4usize, 16] {
        let hs = geometric_grid(0.2, 0.04, points).unwrap();
        for (label, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel { jobs: 0 })] {
            group.bench_with_input(BenchmarkId::new(label, points), &hs, |b, hs| {
                b.iter(|| black_box(sweep(&problem, hs, &opts, exec)))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, shift_sweep);
criterion_main!(benches);
