//! Steady Neo-Hookean hyperelasticity under prescribed boundary displacement.
//!
//! Total-Lagrangian weak form on the reference patch: find the displacement
//! field with `int grad(w) : P = 0`, where `P = F S`,
//! `S = lambda/2 (J^2 - 1) C^-1 + mu (I - C^-1)`, `F = I + grad(u)`,
//! `C = F^T F` and `J = det F`. The consistent tangent contracts the material
//! tensor obtained by differentiating `S` with respect to `C`. Boundary
//! displacement is ramped linearly over the load steps with one halved retry
//! on a failed step.

use crate::assembly::{
    apply_dirichlet, form_matrix, form_vector, integrate, preallocate, Partition,
};
use crate::geometry::NurbsPatch;
use crate::linalg::invert_small;
use crate::solvers::{
    gmres_solve, newton_solve, owned_blocks, Ilu0BlockJacobi, MatrixOp, NonlinearSystem,
    SolverConfig, SolverError,
};
use crate::space::TensorSpace;
use crate::sparse::CsrMatrix;

use super::DemoError;

/// Lame constants from Young's modulus and Poisson ratio.
pub fn lame_constants(youngs: f64, poisson: f64) -> (f64, f64) {
    let lambda = youngs * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
    let mu = youngs / (2.0 * (1.0 + poisson));
    (lambda, mu)
}

#[derive(Clone, Debug)]
pub struct HyperelasticProblem {
    pub lambda: f64,
    pub mu: f64,
    /// Total displacement prescribed on the low-x face.
    pub moving_face: [f64; 3],
    /// Displacement prescribed on the high-x face.
    pub fixed_face: [f64; 3],
    pub load_steps: usize,
}

impl Default for HyperelasticProblem {
    fn default() -> Self {
        // Dimensionless aluminum-like constants (E = 70, nu = 0.35).
        let (lambda, mu) = lame_constants(70.0, 0.35);
        HyperelasticProblem {
            lambda,
            mu,
            moving_face: [-0.2, 0.0, 0.0],
            fixed_face: [0.0; 3],
            load_steps: 15,
        }
    }
}

/// Residual and consistent tangent of the displacement problem. Constrained
/// dofs are held at their prescribed values: residual entries vanish there
/// and the tangent carries identity rows and columns.
pub struct NeoHookeanSystem<'a> {
    pub space: &'a TensorSpace,
    pub part: &'a Partition,
    pub patch: &'a NurbsPatch,
    pattern: CsrMatrix,
    pub lambda: f64,
    pub mu: f64,
    bc_dofs: Vec<usize>,
}

/// Kinematics at a quadrature point.
struct PointState {
    f: [[f64; 3]; 3],
    c_inv: [[f64; 3]; 3],
    jac: f64,
    s: [[f64; 3]; 3],
}

fn kinematics(dim: usize, grad_u: &[[f64; 3]; 3], lambda: f64, mu: f64) -> PointState {
    let mut f = [[0.0; 3]; 3];
    for i in 0..dim {
        f[i][i] = 1.0;
        for j in 0..dim {
            f[i][j] += grad_u[i][j];
        }
    }
    let mut c = [[0.0; 3]; 3];
    for i in 0..dim {
        for j in 0..dim {
            let mut s = 0.0;
            for k in 0..dim {
                s += f[k][i] * f[k][j];
            }
            c[i][j] = s;
        }
    }
    let (c_inv, det_c) = invert_small(dim, &c);
    let jac = det_c.sqrt();
    let j2m1 = det_c - 1.0;
    let mut s = [[0.0; 3]; 3];
    for i in 0..dim {
        for j in 0..dim {
            s[i][j] = 0.5 * lambda * j2m1 * c_inv[i][j] - mu * c_inv[i][j];
        }
        s[i][i] += mu;
    }
    PointState { f, c_inv, jac, s }
}

impl<'a> NeoHookeanSystem<'a> {
    pub fn new(
        space: &'a TensorSpace,
        part: &'a Partition,
        patch: &'a NurbsPatch,
        problem: &HyperelasticProblem,
        bc_dofs: Vec<usize>,
    ) -> Result<Self, DemoError> {
        if space.dof_per_node() != space.dim() {
            return Err(DemoError::InvalidConfig(format!(
                "displacement space needs {} components per node, got {}",
                space.dim(),
                space.dof_per_node()
            )));
        }
        let pattern = preallocate(space)?;
        Ok(NeoHookeanSystem {
            space,
            part,
            patch,
            pattern,
            lambda: problem.lambda,
            mu: problem.mu,
            bc_dofs,
        })
    }

    fn grad_u(qp: &crate::assembly::QPoint, dim: usize) -> [[f64; 3]; 3] {
        let mut g = [[0.0; 3]; 3];
        for i in 0..dim {
            let gi = qp.field_grad(0, i);
            for j in 0..dim {
                g[i][j] = gi[j];
            }
        }
        g
    }

    /// Strain energy of a displacement field.
    pub fn strain_energy(&self, u: &[f64]) -> Result<f64, DemoError> {
        let dim = self.space.dim();
        let (lambda, mu) = (self.lambda, self.mu);
        Ok(integrate(self.space, self.part, self.patch, &[u], 1, |qp| {
            let grad = Self::grad_u(qp, dim);
            let st = kinematics(dim, &grad, lambda, mu);
            let det_c = st.jac * st.jac;
            let mut tr_c = 0.0;
            for i in 0..dim {
                for k in 0..dim {
                    tr_c += st.f[k][i] * st.f[k][i];
                }
            }
            0.25 * lambda * (det_c - 1.0) - (0.5 * lambda + mu) * st.jac.ln()
                + 0.5 * mu * (tr_c - dim as f64)
        })?)
    }
}

impl NonlinearSystem for NeoHookeanSystem<'_> {
    fn residual(&self, u: &[f64]) -> Result<Vec<f64>, SolverError> {
        let dim = self.space.dim();
        let (lambda, mu) = (self.lambda, self.mu);
        let mut r = form_vector(self.space, self.part, self.patch, &[u], 1, |qp, out| {
            let grad = Self::grad_u(qp, dim);
            let st = kinematics(dim, &grad, lambda, mu);
            // First Piola-Kirchhoff stress P = F S.
            let mut p = [[0.0; 3]; 3];
            for i in 0..dim {
                for jj in 0..dim {
                    let mut s = 0.0;
                    for m in 0..dim {
                        s += st.f[i][m] * st.s[m][jj];
                    }
                    p[i][jj] = s;
                }
            }
            let n = qp.shapes.count;
            for a in 0..n {
                for i in 0..dim {
                    let mut s = 0.0;
                    for jj in 0..dim {
                        s += qp.shapes.grad[a * dim + jj] * p[i][jj];
                    }
                    out[a * dim + i] = s;
                }
            }
        })?;
        for &d in &self.bc_dofs {
            r[d] = 0.0;
        }
        Ok(r)
    }

    fn jacobian(&self, u: &[f64]) -> Result<CsrMatrix, SolverError> {
        let dim = self.space.dim();
        let (lambda, mu) = (self.lambda, self.mu);
        let mut jac = form_matrix(
            self.space,
            self.part,
            self.patch,
            &[u],
            1,
            &self.pattern,
            |qp, out| {
                let grad = Self::grad_u(qp, dim);
                let st = kinematics(dim, &grad, lambda, mu);
                let det_c = st.jac * st.jac;
                let geo_factor = 2.0 * mu - lambda * (det_c - 1.0);
                // A[i][J][k][L] = d P_iJ / d F_kL.
                let mut a_t = [[[[0.0f64; 3]; 3]; 3]; 3];
                for i in 0..dim {
                    for jj in 0..dim {
                        for k in 0..dim {
                            for l in 0..dim {
                                let mut v = if i == k { st.s[jj][l] } else { 0.0 };
                                for m in 0..dim {
                                    for p in 0..dim {
                                        let cc = lambda * det_c * st.c_inv[m][jj] * st.c_inv[p][l]
                                            + 0.5
                                                * geo_factor
                                                * (st.c_inv[m][p] * st.c_inv[l][jj]
                                                    + st.c_inv[m][l] * st.c_inv[p][jj]);
                                        v += st.f[i][m] * cc * st.f[k][p];
                                    }
                                }
                                a_t[i][jj][k][l] = v;
                            }
                        }
                    }
                }
                let n = qp.shapes.count;
                let total = n * dim;
                for a in 0..n {
                    for i in 0..dim {
                        for b in 0..n {
                            for k in 0..dim {
                                let mut s = 0.0;
                                for jj in 0..dim {
                                    for l in 0..dim {
                                        s += qp.shapes.grad[a * dim + jj]
                                            * a_t[i][jj][k][l]
                                            * qp.shapes.grad[b * dim + l];
                                    }
                                }
                                out[(a * dim + i) * total + (b * dim + k)] = s;
                            }
                        }
                    }
                }
            },
        )?;
        let bc: Vec<(usize, f64)> = self.bc_dofs.iter().map(|&d| (d, 0.0)).collect();
        let mut dummy = vec![0.0; jac.nrows()];
        apply_dirichlet(&mut jac, &mut dummy, &bc)?;
        Ok(jac)
    }
}

#[derive(Clone, Debug)]
pub struct LoadStepMonitor {
    pub step: usize,
    pub factor: f64,
    pub newton_iterations: usize,
    pub residual: f64,
    pub energy: f64,
}

pub struct HyperelasticReport {
    pub displacement: Vec<f64>,
    pub monitors: Vec<LoadStepMonitor>,
    pub strain_energy: f64,
}

/// Boundary dofs and total values for the two constrained faces.
pub fn face_displacement_bc(
    space: &TensorSpace,
    problem: &HyperelasticProblem,
) -> Result<Vec<(usize, f64)>, DemoError> {
    let dpn = space.dof_per_node();
    let mut bc = Vec::new();
    for (high, disp) in [(false, problem.moving_face), (true, problem.fixed_face)] {
        for node in space.boundary_nodes(0, high) {
            let idx = space.node_index(node)?;
            for c in 0..dpn {
                bc.push((idx * dpn + c, disp[c]));
            }
        }
    }
    Ok(bc)
}

pub fn neohookean_run(
    space: &TensorSpace,
    patch: &NurbsPatch,
    part: &Partition,
    problem: &HyperelasticProblem,
    cfg: &SolverConfig,
) -> Result<HyperelasticReport, DemoError> {
    if problem.load_steps == 0 {
        return Err(DemoError::InvalidConfig("load_steps must be positive".into()));
    }
    let bc = face_displacement_bc(space, problem)?;
    let bc_dofs: Vec<usize> = bc.iter().map(|&(d, _)| d).collect();
    let sys = NeoHookeanSystem::new(space, part, patch, problem, bc_dofs)?;
    let blocks = match cfg.blocks {
        Some(b) => crate::solvers::contiguous_blocks(space.dof_count(), b),
        None => owned_blocks(part),
    };

    let mut u = vec![0.0; space.dof_count()];
    let mut monitors = Vec::with_capacity(problem.load_steps);
    let solve_at = |factor: f64, u0: &[f64]| -> Result<crate::solvers::NewtonOutcome, DemoError> {
        let mut start = u0.to_vec();
        for &(d, v) in &bc {
            start[d] = factor * v;
        }
        Ok(newton_solve(&sys, start, cfg, part.exec(), &blocks)?)
    };

    for step in 1..=problem.load_steps {
        let factor = step as f64 / problem.load_steps as f64;
        let mut out = solve_at(factor, &u)?;
        if !out.converged {
            // One halved retry through the intermediate load level.
            let half = (step as f64 - 0.5) / problem.load_steps as f64;
            let mid = solve_at(half, &u)?;
            if !mid.converged {
                return Err(DemoError::SolverFailure {
                    stage: "hyperelastic load step",
                    detail: format!("step {step} diverged even after halving the increment"),
                });
            }
            out = solve_at(factor, &mid.u)?;
            if !out.converged {
                return Err(DemoError::SolverFailure {
                    stage: "hyperelastic load step",
                    detail: format!("step {step} diverged after the halved retry"),
                });
            }
        }
        u = out.u;
        monitors.push(LoadStepMonitor {
            step,
            factor,
            newton_iterations: out.iterations,
            residual: *out.residuals.last().unwrap_or(&f64::NAN),
            energy: sys.strain_energy(&u)?,
        });
    }

    let strain_energy = sys.strain_energy(&u)?;
    Ok(HyperelasticReport { displacement: u, monitors, strain_energy })
}

/// Small-strain isotropic elasticity solve with the same boundary handling,
/// the reference for the small-displacement limit.
pub fn linear_elasticity_solve(
    space: &TensorSpace,
    patch: &NurbsPatch,
    part: &Partition,
    lambda: f64,
    mu: f64,
    bc: &[(usize, f64)],
    cfg: &SolverConfig,
) -> Result<Vec<f64>, DemoError> {
    let pattern = preallocate(space)?;
    let dim = space.dim();
    let mut k = form_matrix(space, part, patch, &[], 1, &pattern, |qp, out| {
        let n = qp.shapes.count;
        let total = n * dim;
        for a in 0..n {
            for b in 0..n {
                let mut grads = 0.0;
                for j in 0..dim {
                    grads += qp.shapes.grad[a * dim + j] * qp.shapes.grad[b * dim + j];
                }
                for i in 0..dim {
                    for kk in 0..dim {
                        let mut v = lambda
                            * qp.shapes.grad[a * dim + i]
                            * qp.shapes.grad[b * dim + kk]
                            + mu * qp.shapes.grad[a * dim + kk] * qp.shapes.grad[b * dim + i];
                        if i == kk {
                            v += mu * grads;
                        }
                        out[(a * dim + i) * total + (b * dim + kk)] = v;
                    }
                }
            }
        }
    })?;
    let mut f = vec![0.0; space.dof_count()];
    apply_dirichlet(&mut k, &mut f, bc)?;
    let blocks = match cfg.blocks {
        Some(b) => crate::solvers::contiguous_blocks(space.dof_count(), b),
        None => owned_blocks(part),
    };
    let precond = Ilu0BlockJacobi::from_blocks(&k, &blocks, part.exec())?;
    let op = MatrixOp { matrix: &k, exec: part.exec() };
    let lin = gmres_solve(&op, &f, &precond, None, &cfg.gmres, &part.exec())?;
    if !lin.converged {
        return Err(DemoError::SolverFailure {
            stage: "linear elasticity solve",
            detail: format!("residual {:e}", lin.residuals.last().unwrap_or(&f64::NAN)),
        });
    }
    Ok(lin.x)
}
