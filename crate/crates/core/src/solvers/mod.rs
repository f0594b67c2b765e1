//! Linear, nonlinear and transient solvers.
//!
//! Restarted GMRES with right preconditioning (the reported residual is the
//! true residual), a block-Jacobi/ILU(0) preconditioner with one block per
//! partition worker, inexact Newton, and the generalized-alpha integrator for
//! first-order systems. A fixed-iteration mode on both Newton and GMRES
//! reproduces the fixed-budget benchmarking protocol (exactly N inner
//! iterations, no convergence exit).

mod galpha;
mod gmres;
mod ilu;
mod newton;

pub use galpha::{galpha_step, AlphaParams, StepReport, TimeState, TransientSystem};
pub use gmres::{gmres_solve, GmresConfig, GmresResult, Identity, LinearOp, MatrixOp};
pub use ilu::Ilu0BlockJacobi;
pub use newton::{newton_solve, NewtonConfig, NewtonOutcome, NonlinearSystem};

use thiserror::Error;

use crate::assembly::{AssemblyError, Partition};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("spectral radius {rho} outside [0, 1]")]
    InvalidSpectralRadius { rho: f64 },
    #[error("time step {dt} must be positive")]
    InvalidTimeStep { dt: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("Newton did not converge in {iterations} iterations (residual {residual:e}) at t = {t}")]
    StepDiverged { t: f64, iterations: usize, residual: f64 },
    #[error("dimension mismatch in solver operands: {0}")]
    Dimension(&'static str),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Sparse(#[from] crate::sparse::SparseError),
}

/// Tolerances and iteration budgets for the nested Newton/GMRES loops.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub gmres: GmresConfig,
    pub newton: NewtonConfig,
    /// Preconditioner block count override; `None` means one block per
    /// partition worker.
    pub blocks: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            gmres: GmresConfig::default(),
            newton: NewtonConfig::default(),
            blocks: None,
        }
    }
}

impl SolverConfig {
    /// Fixed-budget benchmark protocol: exactly `newton` nonlinear iterations,
    /// each with exactly `gmres` linear iterations.
    pub fn fixed_budget(newton: usize, gmres: usize) -> Self {
        SolverConfig {
            gmres: GmresConfig { fixed_iters: Some(gmres), restart: gmres.max(1), ..Default::default() },
            newton: NewtonConfig { fixed_iters: Some(newton), ..Default::default() },
            blocks: None,
        }
    }
}

/// One preconditioner block per worker: the dofs each worker owns.
pub fn owned_blocks(part: &Partition) -> Vec<Vec<usize>> {
    (0..part.worker_count()).map(|w| part.owned(w).to_vec()).collect()
}

/// Contiguous dof blocks, for block counts decoupled from a partition.
pub fn contiguous_blocks(n: usize, count: usize) -> Vec<Vec<usize>> {
    crate::exec::split_ranges(n, count)
        .into_iter()
        .map(|r| r.collect())
        .collect()
}
