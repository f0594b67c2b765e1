//! Solver kernels under the fixed iteration budget: restarted GMRES with
//! block-Jacobi/ILU(0) on a Poisson system, sequential against parallel.

use std::time::Duration;

use criterion::{criterion_group, criterion_main, Criterion};

use iga::assembly::{apply_dirichlet, form_matrix, form_vector, preallocate, Partition};
use iga::demos::dirichlet_boundary;
use iga::geometry::NurbsPatch;
use iga::solvers::{gmres_solve, owned_blocks, GmresConfig, Ilu0BlockJacobi, MatrixOp};
use iga::space::{AxisSpec, TensorSpace};
use iga::{ExecPolicy, Execution};

fn bench_solve(c: &mut Criterion) {
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(2);
    let n = 48;
    let space = TensorSpace::build(
        &[AxisSpec::open(n, 2, 1), AxisSpec::open(n, 2, 1)],
        1,
    )
    .unwrap();
    let patch = NurbsPatch::greville_identity(&space);
    let part = Partition::new(&space, workers).unwrap();
    let pattern = preallocate(&space).unwrap();
    let mut matrix = form_matrix(&space, &part, &patch, &[], 1, &pattern, |qp, out| {
        let nl = qp.shapes.count;
        for a in 0..nl {
            for b in 0..nl {
                let mut s = 0.0;
                for i in 0..2 {
                    s += qp.shapes.grad[a * 2 + i] * qp.shapes.grad[b * 2 + i];
                }
                out[a * nl + b] = s;
            }
        }
    })
    .unwrap();
    let mut rhs = form_vector(&space, &part, &patch, &[], 1, |qp, out| {
        for (a, v) in qp.shapes.values.iter().enumerate() {
            out[a] = *v;
        }
    })
    .unwrap();
    let bc = dirichlet_boundary(&space, &patch, 0, |_| 0.0).unwrap();
    apply_dirichlet(&mut matrix, &mut rhs, &bc).unwrap();
    let blocks = owned_blocks(&part);
    let cfg = GmresConfig { fixed_iters: Some(30), restart: 30, ..Default::default() };

    let mut group = c.benchmark_group("gmres30_ilu0_48x48");
    group.sample_size(20).measurement_time(Duration::from_secs(4));
    for (label, exec) in [
        ("sequential", ExecPolicy::sequential()),
        ("parallel", ExecPolicy { workers, mode: Execution::Parallel }),
    ] {
        let precond = Ilu0BlockJacobi::from_blocks(&matrix, &blocks, exec).unwrap();
        let op = MatrixOp { matrix: &matrix, exec };
        group.bench_function(label, |b| {
            b.iter(|| gmres_solve(&op, &rhs, &precond, None, &cfg, &exec).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("ilu0_setup_48x48");
    group.sample_size(20).measurement_time(Duration::from_secs(3));
    for (label, exec) in [
        ("sequential", ExecPolicy::sequential()),
        ("parallel", ExecPolicy { workers, mode: Execution::Parallel }),
    ] {
        group.bench_function(label, |b| {
            b.iter(|| Ilu0BlockJacobi::from_blocks(&matrix, &blocks, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_solve);
criterion_main!(benches);
