//! Poisson demo: -Laplace(u) = f with Dirichlet data, assembled from the
//! grad-grad weak form and solved with GMRES + block-Jacobi/ILU(0).

use std::sync::Arc;

use crate::assembly::{apply_dirichlet, form_matrix, form_vector, preallocate, Partition};
use crate::geometry::NurbsPatch;
use crate::solvers::{gmres_solve, owned_blocks, Ilu0BlockJacobi, MatrixOp, SolverConfig};
use crate::space::TensorSpace;

use super::{dirichlet_boundary, solution_errors, DemoError, ErrorNorms};

type Field = Arc<dyn Fn([f64; 3]) -> f64 + Send + Sync>;
type GradField = Arc<dyn Fn([f64; 3]) -> [f64; 3] + Send + Sync>;

#[derive(Clone)]
pub struct PoissonProblem {
    pub source: Field,
    pub dirichlet: Field,
    pub exact: Option<Field>,
    pub exact_grad: Option<GradField>,
}

impl PoissonProblem {
    /// Manufactured product-of-sines solution; valid on any geometry since
    /// source and boundary data are functions of physical coordinates.
    pub fn manufactured_sine(dim: usize) -> Self {
        use std::f64::consts::PI;
        let exact = move |x: [f64; 3]| -> f64 {
            (0..dim).map(|d| (PI * x[d]).sin()).product()
        };
        let grad = move |x: [f64; 3]| -> [f64; 3] {
            let mut g = [0.0; 3];
            for i in 0..dim {
                let mut v = PI * (PI * x[i]).cos();
                for d in 0..dim {
                    if d != i {
                        v *= (PI * x[d]).sin();
                    }
                }
                g[i] = v;
            }
            g
        };
        PoissonProblem {
            source: Arc::new(move |x| dim as f64 * PI * PI * exact(x)),
            dirichlet: Arc::new(exact),
            exact: Some(Arc::new(exact)),
            exact_grad: Some(Arc::new(grad)),
        }
    }

    /// Linear exact solution; reproduced exactly by any space.
    pub fn linear(coeff: [f64; 3], offset: f64) -> Self {
        let exact = move |x: [f64; 3]| {
            offset + coeff[0] * x[0] + coeff[1] * x[1] + coeff[2] * x[2]
        };
        PoissonProblem {
            source: Arc::new(|_| 0.0),
            dirichlet: Arc::new(exact),
            exact: Some(Arc::new(exact)),
            exact_grad: Some(Arc::new(move |_| coeff)),
        }
    }
}

pub struct PoissonReport {
    pub dofs: usize,
    pub solution: Vec<f64>,
    pub errors: Option<ErrorNorms>,
    pub gmres_iterations: usize,
    pub final_residual: f64,
    pub residual_history: Vec<f64>,
    pub matrix: crate::sparse::CsrMatrix,
    pub rhs: Vec<f64>,
}

pub fn poisson_run(
    space: &TensorSpace,
    patch: &NurbsPatch,
    part: &Partition,
    problem: &PoissonProblem,
    cfg: &SolverConfig,
) -> Result<PoissonReport, DemoError> {
    let pattern = preallocate(space)?;
    let stiffness = form_matrix(space, part, patch, &[], 1, &pattern, |qp, out| {
        let n = qp.shapes.count;
        let dim = qp.shapes.dim;
        for a in 0..n {
            for b in 0..n {
                let mut s = 0.0;
                for i in 0..dim {
                    s += qp.shapes.grad[a * dim + i] * qp.shapes.grad[b * dim + i];
                }
                out[a * n + b] = s;
            }
        }
    })?;
    let source = problem.source.clone();
    let mut rhs = form_vector(space, part, patch, &[], 1, move |qp, out| {
        let f = source(qp.x);
        for (a, v) in qp.shapes.values.iter().enumerate() {
            out[a] = f * v;
        }
    })?;

    let mut matrix = stiffness;
    let bc = dirichlet_boundary(space, patch, 0, |x| (problem.dirichlet)(x))?;
    apply_dirichlet(&mut matrix, &mut rhs, &bc)?;

    let blocks = match cfg.blocks {
        Some(b) => crate::solvers::contiguous_blocks(space.dof_count(), b),
        None => owned_blocks(part),
    };
    let precond = Ilu0BlockJacobi::from_blocks(&matrix, &blocks, part.exec())?;
    let op = MatrixOp { matrix: &matrix, exec: part.exec() };
    let lin = gmres_solve(&op, &rhs, &precond, None, &cfg.gmres, &part.exec())?;
    if !lin.converged {
        return Err(DemoError::SolverFailure {
            stage: "poisson linear solve",
            detail: format!(
                "residual {:e} after {} iterations",
                lin.residuals.last().unwrap_or(&f64::NAN),
                lin.iterations
            ),
        });
    }

    let errors = match (&problem.exact, &problem.exact_grad) {
        (Some(e), Some(g)) => {
            let e = e.clone();
            let g = g.clone();
            Some(solution_errors(space, part, patch, &lin.x, move |x| e(x), move |x| g(x))?)
        }
        _ => None,
    };

    Ok(PoissonReport {
        dofs: space.dof_count(),
        solution: lin.x,
        errors,
        gmres_iterations: lin.iterations,
        final_residual: *lin.residuals.last().unwrap_or(&f64::NAN),
        residual_history: lin.residuals,
        matrix,
        rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::AxisSpec;

    #[test]
    fn linear_solution_is_exact() {
        let space = TensorSpace::build(
            &[AxisSpec::open(3, 2, 1), AxisSpec::open(3, 2, 1)],
            1,
        )
        .unwrap();
        let patch = NurbsPatch::greville_identity(&space);
        let part = Partition::new(&space, 1).unwrap();
        let problem = PoissonProblem::linear([2.0, -1.0, 0.0], 0.3);
        let report =
            poisson_run(&space, &patch, &part, &problem, &SolverConfig::default()).unwrap();
        let errors = report.errors.unwrap();
        assert!(errors.l2 < 1e-10, "l2 error {}", errors.l2);
        assert!(errors.h1 < 1e-9, "h1 error {}", errors.h1);
    }

    #[test]
    fn sine_solution_converges() {
        let mut last = f64::INFINITY;
        for n in [4, 8] {
            let space = TensorSpace::build(
                &[AxisSpec::open(n, 2, 1), AxisSpec::open(n, 2, 1)],
                1,
            )
            .unwrap();
            let patch = NurbsPatch::greville_identity(&space);
            let part = Partition::new(&space, 2).unwrap();
            let problem = PoissonProblem::manufactured_sine(2);
            let report =
                poisson_run(&space, &patch, &part, &problem, &SolverConfig::default()).unwrap();
            let l2 = report.errors.unwrap().l2;
            assert!(l2 < last);
            last = l2;
        }
        // Two refinements of a quadratic space: error should be tiny already.
        assert!(last < 5e-4, "l2 error {last}");
    }
}
