//! Strong-scaling harness with a fixed iteration budget.
//!
//! Runs the Cahn-Hilliard problem for a fixed number of time steps with
//! exactly `newton_per_step` nonlinear iterations per step and exactly
//! `gmres_per_newton` linear iterations per nonlinear iteration, block-Jacobi
//! ILU(0) with one block per worker. Identical numerical work per worker
//! count makes wall-time ratios meaningful; each worker count runs on a
//! dedicated thread pool of that size.

use std::time::Instant;

use crate::assembly::Partition;
use crate::geometry::NurbsPatch;
use crate::solvers::{galpha_step, owned_blocks, AlphaParams, SolverConfig};
use crate::space::{AxisSpec, TensorSpace};

use super::cahn_hilliard::{CahnHilliardProblem, CahnHilliardSystem};
use super::DemoError;

#[derive(Clone, Debug)]
pub struct ScalingOptions {
    pub dim: usize,
    pub elements_per_dim: usize,
    pub degree: usize,
    pub steps: usize,
    pub newton_per_step: usize,
    pub gmres_per_newton: usize,
    pub dt: f64,
    pub rho_inf: f64,
    pub worker_counts: Vec<usize>,
    pub seed: u64,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        ScalingOptions {
            dim: 2,
            elements_per_dim: 64,
            degree: 2,
            steps: 10,
            newton_per_step: 2,
            gmres_per_newton: 30,
            dt: 1e-4,
            rho_inf: 0.5,
            worker_counts: vec![1, 2, 4, 8],
            seed: 4242,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScalingRow {
    pub workers: usize,
    pub seconds: f64,
    /// T(1) / (W * T(W)), 1.0 for the first row.
    pub efficiency: f64,
}

#[derive(Clone, Debug)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    pub elements: usize,
    pub dofs: usize,
    pub steps: usize,
    pub newton_per_step: usize,
    pub gmres_per_newton: usize,
}

impl std::fmt::Display for ScalingReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "fixed budget: {} steps x {} Newton x {} GMRES, {} elements, {} dofs",
            self.steps, self.newton_per_step, self.gmres_per_newton, self.elements, self.dofs
        )?;
        writeln!(f, "{:>8} {:>12} {:>12}", "workers", "time [s]", "efficiency")?;
        for row in &self.rows {
            writeln!(
                f,
                "{:>8} {:>12.3} {:>11.0}%",
                row.workers,
                row.seconds,
                row.efficiency * 100.0
            )?;
        }
        Ok(())
    }
}

fn run_protocol(
    space: &TensorSpace,
    patch: &NurbsPatch,
    part: &Partition,
    opts: &ScalingOptions,
) -> Result<f64, DemoError> {
    let problem = CahnHilliardProblem { seed: opts.seed, ..Default::default() };
    let sys = CahnHilliardSystem::new(space, part, patch, &problem)?;
    let params = AlphaParams::new(opts.rho_inf, opts.dt)?;
    let cfg = SolverConfig::fixed_budget(opts.newton_per_step, opts.gmres_per_newton);
    let blocks = owned_blocks(part);

    let mut state = sys.initial_state(&problem);
    let start = Instant::now();
    for _ in 0..opts.steps {
        let (next, _) = galpha_step(&sys, &state, &params, &cfg, part.exec(), &blocks)?;
        state = next;
    }
    Ok(start.elapsed().as_secs_f64())
}

pub fn scaling_bench(opts: &ScalingOptions) -> Result<ScalingReport, DemoError> {
    if opts.worker_counts.is_empty() {
        return Err(DemoError::InvalidConfig("no worker counts requested".into()));
    }
    if !(2..=3).contains(&opts.dim) {
        return Err(DemoError::InvalidConfig(format!(
            "scaling harness supports 2 or 3 dimensions, got {}",
            opts.dim
        )));
    }
    let k = opts.degree - 1;
    let axis = AxisSpec::periodic(opts.elements_per_dim, opts.degree, k, k);
    let axes = vec![axis; opts.dim];
    let space = TensorSpace::build(&axes, 1)?;
    let patch = NurbsPatch::greville_identity(&space);

    let mut rows: Vec<ScalingRow> = Vec::with_capacity(opts.worker_counts.len());
    for &w in &opts.worker_counts {
        let part = Partition::new(&space, w)?;
        let seconds = run_with_pool(w, || run_protocol(&space, &patch, &part, opts))?;
        let efficiency = match rows.first() {
            Some(base) => base.seconds / (w as f64 * seconds),
            None => 1.0,
        };
        rows.push(ScalingRow { workers: w, seconds, efficiency });
    }

    Ok(ScalingReport {
        rows,
        elements: space.element_count(),
        dofs: space.dof_count(),
        steps: opts.steps,
        newton_per_step: opts.newton_per_step,
        gmres_per_newton: opts.gmres_per_newton,
    })
}

#[cfg(feature = "parallel")]
fn run_with_pool<T>(
    workers: usize,
    f: impl FnOnce() -> Result<T, DemoError> + Send,
) -> Result<T, DemoError>
where
    T: Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| DemoError::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(f)
}

#[cfg(not(feature = "parallel"))]
fn run_with_pool<T>(
    _workers: usize,
    f: impl FnOnce() -> Result<T, DemoError> + Send,
) -> Result<T, DemoError>
where
    T: Send,
{
    f()
}
