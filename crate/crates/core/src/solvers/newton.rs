//! Inexact Newton iteration with GMRES inner solves.

use crate::exec::ExecPolicy;
use crate::linalg;
use crate::sparse::CsrMatrix;

use super::gmres::{gmres_solve, MatrixOp};
use super::ilu::Ilu0BlockJacobi;
use super::{SolverConfig, SolverError};

/// Residual and Jacobian callbacks of a nonlinear system. Both must be
/// reentrant; they may parallelize internally.
pub trait NonlinearSystem: Sync {
    fn residual(&self, u: &[f64]) -> Result<Vec<f64>, SolverError>;
    fn jacobian(&self, u: &[f64]) -> Result<CsrMatrix, SolverError>;
}

#[derive(Clone, Debug)]
pub struct NewtonConfig {
    pub max_iters: usize,
    pub rtol: f64,
    pub atol: f64,
    /// Run exactly this many iterations, ignoring tolerances.
    pub fixed_iters: Option<usize>,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig { max_iters: 20, rtol: 1e-8, atol: 1e-12, fixed_iters: None }
    }
}

#[derive(Clone, Debug)]
pub struct NewtonOutcome {
    pub u: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Residual norm before each iteration and after the last one.
    pub residuals: Vec<f64>,
    pub gmres_iterations: usize,
}

/// Solve `F(u) = 0` starting from `u0`. Convergence when the residual norm
/// drops below `max(rtol * |F(u0)|, atol)`; running out of iterations yields
/// a non-converged outcome, not an error.
pub fn newton_solve<S: NonlinearSystem>(
    sys: &S,
    u0: Vec<f64>,
    cfg: &SolverConfig,
    exec: ExecPolicy,
    blocks: &[Vec<usize>],
) -> Result<NewtonOutcome, SolverError> {
    let mut u = u0;
    let mut r = sys.residual(&u)?;
    let mut norm = linalg::norm2(&r, &exec);
    let target = (cfg.newton.rtol * norm).max(cfg.newton.atol);
    let mut residuals = vec![norm];
    let mut gmres_total = 0usize;

    let budget = cfg.newton.fixed_iters.unwrap_or(cfg.newton.max_iters);
    let mut iterations = 0usize;
    while iterations < budget {
        if cfg.newton.fixed_iters.is_none() && norm <= target {
            break;
        }
        let jac = sys.jacobian(&u)?;
        let precond = Ilu0BlockJacobi::from_blocks(&jac, blocks, exec)?;
        let op = MatrixOp { matrix: &jac, exec };
        let lin = gmres_solve(&op, &r, &precond, None, &cfg.gmres, &exec)?;
        gmres_total += lin.iterations;
        for (ui, di) in u.iter_mut().zip(&lin.x) {
            *ui -= di;
        }
        iterations += 1;
        r = sys.residual(&u)?;
        norm = linalg::norm2(&r, &exec);
        residuals.push(norm);
    }

    let converged = match cfg.newton.fixed_iters {
        Some(_) => true,
        None => norm <= target,
    };
    Ok(NewtonOutcome { u, converged, iterations, residuals, gmres_iterations: gmres_total })
}
