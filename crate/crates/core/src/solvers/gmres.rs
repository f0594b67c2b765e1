//! Restarted GMRES with right preconditioning.
//!
//! The Krylov space is built for `A M^-1`; preconditioned directions are
//! stored explicitly so the solution update needs no extra preconditioner
//! application and the tracked residual is the true residual. Modified
//! Gram-Schmidt orthogonalization, Givens rotations for the least-squares
//! update.

use crate::exec::ExecPolicy;
use crate::linalg;
use crate::sparse::CsrMatrix;

use super::SolverError;

/// Action of a square operator.
pub trait LinearOp: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// CSR matrix bound to an execution policy.
pub struct MatrixOp<'a> {
    pub matrix: &'a CsrMatrix,
    pub exec: ExecPolicy,
}

impl LinearOp for MatrixOp<'_> {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matrix.matvec_into(x, y, &self.exec);
    }
}

/// Identity preconditioner.
pub struct Identity;

impl LinearOp for Identity {
    fn dim(&self) -> usize {
        0
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }
}

#[derive(Clone, Debug)]
pub struct GmresConfig {
    pub restart: usize,
    pub max_iters: usize,
    pub rtol: f64,
    pub atol: f64,
    /// Run exactly this many iterations, ignoring tolerances.
    pub fixed_iters: Option<usize>,
}

impl Default for GmresConfig {
    fn default() -> Self {
        GmresConfig { restart: 30, max_iters: 1000, rtol: 1e-8, atol: 1e-12, fixed_iters: None }
    }
}

#[derive(Clone, Debug)]
pub struct GmresResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub stagnated: bool,
    /// True residual norm before each iteration and after the last one.
    pub residuals: Vec<f64>,
}

/// Solve `A x = b` with right-preconditioned restarted GMRES.
pub fn gmres_solve(
    a: &impl LinearOp,
    b: &[f64],
    m: &impl LinearOp,
    x0: Option<&[f64]>,
    cfg: &GmresConfig,
    exec: &ExecPolicy,
) -> Result<GmresResult, SolverError> {
    let n = b.len();
    if a.dim() != n {
        return Err(SolverError::Dimension("operator dimension does not match right-hand side"));
    }
    if cfg.restart == 0 {
        return Err(SolverError::InvalidConfig("restart length must be at least 1"));
    }
    let restart = cfg.restart;
    let budget = cfg.fixed_iters.unwrap_or(cfg.max_iters);

    let mut x = match x0 {
        Some(v) => v.to_vec(),
        None => vec![0.0; n],
    };
    let norm_b = linalg::norm2(b, exec);
    let target = (cfg.rtol * norm_b).max(cfg.atol);

    let mut residuals = Vec::new();
    let mut total = 0usize;
    let mut stagnated = false;

    let mut w = vec![0.0; n];
    loop {
        // True residual at the start of the cycle.
        a.apply(&x, &mut w);
        let mut r: Vec<f64> = b.iter().zip(&w).map(|(bi, wi)| bi - wi).collect();
        let beta = linalg::norm2(&r, exec);
        residuals.push(beta);
        if cfg.fixed_iters.is_none() && beta <= target {
            return Ok(GmresResult { x, iterations: total, converged: true, stagnated, residuals });
        }
        if total >= budget {
            let converged = beta <= target;
            return Ok(GmresResult { x, iterations: total, converged, stagnated, residuals });
        }
        if beta == 0.0 {
            return Ok(GmresResult { x, iterations: total, converged: true, stagnated, residuals });
        }

        let cycle_start = beta;
        linalg::scale(&mut r, 1.0 / beta);
        let mut v: Vec<Vec<f64>> = vec![r];
        let mut z: Vec<Vec<f64>> = Vec::new();
        let mut h = vec![vec![0.0f64; restart]; restart + 1];
        let mut cs = vec![0.0f64; restart];
        let mut sn = vec![0.0f64; restart];
        let mut g = vec![0.0f64; restart + 1];
        g[0] = beta;

        let mut cols = 0usize;
        let mut happy = false;
        for j in 0..restart {
            let mut zj = vec![0.0; n];
            m.apply(&v[j], &mut zj);
            a.apply(&zj, &mut w);
            z.push(zj);

            for i in 0..=j {
                let hij = linalg::dot(&w, &v[i], exec);
                h[i][j] = hij;
                linalg::axpy(-hij, &v[i], &mut w);
            }
            let hj1 = linalg::norm2(&w, exec);
            h[j + 1][j] = hj1;

            // Givens rotations: fold previous, then form the new one.
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let denom = (h[j][j] * h[j][j] + hj1 * hj1).sqrt();
            if denom == 0.0 {
                cs[j] = 1.0;
                sn[j] = 0.0;
            } else {
                cs[j] = h[j][j] / denom;
                sn[j] = hj1 / denom;
            }
            h[j][j] = cs[j] * h[j][j] + sn[j] * hj1;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];

            cols = j + 1;
            total += 1;
            let res = g[j + 1].abs();
            residuals.push(res);

            // Lucky breakdown: the Krylov space is invariant, solution exact.
            if hj1 <= 1e-14 * cycle_start.max(1.0) {
                happy = true;
                break;
            }
            let done = match cfg.fixed_iters {
                Some(fixed) => total >= fixed,
                None => res <= target || total >= budget,
            };
            if done {
                break;
            }
            let mut vj1 = w.clone();
            linalg::scale(&mut vj1, 1.0 / hj1);
            v.push(vj1);
        }

        // Back substitution on the rotated Hessenberg system.
        let mut y = vec![0.0f64; cols];
        for i in (0..cols).rev() {
            let mut s = g[i];
            for k in i + 1..cols {
                s -= h[i][k] * y[k];
            }
            y[i] = s / h[i][i];
        }
        for (k, yk) in y.iter().enumerate() {
            linalg::axpy(*yk, &z[k], &mut x);
        }

        let cycle_end = g[cols].abs();
        if happy {
            residuals.push(cycle_end);
            return Ok(GmresResult { x, iterations: total, converged: true, stagnated, residuals });
        }
        let finished = match cfg.fixed_iters {
            Some(fixed) => total >= fixed,
            None => cycle_end <= target || total >= budget,
        };
        if finished {
            let converged = match cfg.fixed_iters {
                Some(_) => cycle_end <= target,
                None => cycle_end <= target,
            };
            residuals.push(cycle_end);
            return Ok(GmresResult { x, iterations: total, converged, stagnated, residuals });
        }
        if cycle_end >= cycle_start * (1.0 - 1e-12) {
            stagnated = true;
        }
    }
}
