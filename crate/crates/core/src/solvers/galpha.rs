//! Generalized-alpha time integration for first-order systems.
//!
//! One step advances `(U_n, Udot_n)` to `(U_{n+1}, Udot_{n+1})` by solving
//! `R(U_{n+af}, Udot_{n+am}) = 0` for the unknown `Udot_{n+1}`, with
//!
//! ```text
//! U_{n+af}    = U_n + af (U_{n+1} - U_n)
//! Udot_{n+am} = Udot_n + am (Udot_{n+1} - Udot_n)
//! U_{n+1}     = U_n + dt ((1 - gamma) Udot_n + gamma Udot_{n+1})
//! ```
//!
//! The single parameter rho_inf picks (am, af, gamma) so the method is second
//! order and unconditionally stable; rho_inf = 1 is the trapezoidal rule.

use crate::exec::ExecPolicy;
use crate::sparse::CsrMatrix;

use super::newton::{newton_solve, NonlinearSystem};
use super::{SolverConfig, SolverError};

/// Generalized-alpha parameters derived from the spectral radius at infinite
/// time step.
#[derive(Clone, Copy, Debug)]
pub struct AlphaParams {
    pub rho_inf: f64,
    pub alpha_m: f64,
    pub alpha_f: f64,
    pub gamma: f64,
    pub dt: f64,
}

impl AlphaParams {
    pub fn new(rho_inf: f64, dt: f64) -> Result<Self, SolverError> {
        if !(0.0..=1.0).contains(&rho_inf) {
            return Err(SolverError::InvalidSpectralRadius { rho: rho_inf });
        }
        if !(dt > 0.0) {
            return Err(SolverError::InvalidTimeStep { dt });
        }
        let alpha_m = 0.5 * (3.0 - rho_inf) / (1.0 + rho_inf);
        let alpha_f = 1.0 / (1.0 + rho_inf);
        let gamma = 0.5 + alpha_m - alpha_f;
        Ok(AlphaParams { rho_inf, alpha_m, alpha_f, gamma, dt })
    }
}

/// Solution and time-derivative coefficients at one time level.
#[derive(Clone, Debug)]
pub struct TimeState {
    pub t: f64,
    pub u: Vec<f64>,
    pub udot: Vec<f64>,
}

impl TimeState {
    pub fn new(t: f64, u: Vec<f64>) -> Self {
        let udot = vec![0.0; u.len()];
        TimeState { t, u, udot }
    }
}

/// Semi-discrete residual `R(U, Udot)` and its shifted Jacobian
/// `shift * dR/dUdot + dR/dU`.
pub trait TransientSystem: Sync {
    fn residual(&self, t: f64, u: &[f64], udot: &[f64]) -> Result<Vec<f64>, SolverError>;
    fn jacobian(
        &self,
        t: f64,
        u: &[f64],
        udot: &[f64],
        shift: f64,
    ) -> Result<CsrMatrix, SolverError>;
}

#[derive(Clone, Debug)]
pub struct StepReport {
    pub newton_iterations: usize,
    pub gmres_iterations: usize,
    pub converged: bool,
    pub residuals: Vec<f64>,
}

struct StageSystem<'a, S> {
    sys: &'a S,
    state: &'a TimeState,
    p: AlphaParams,
}

impl<S: TransientSystem> StageSystem<'_, S> {
    fn stages(&self, v1: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let p = &self.p;
        let t_f = self.state.t + p.alpha_f * p.dt;
        let n = v1.len();
        let mut u_f = Vec::with_capacity(n);
        let mut v_m = Vec::with_capacity(n);
        for i in 0..n {
            let u1 = self.state.u[i]
                + p.dt * ((1.0 - p.gamma) * self.state.udot[i] + p.gamma * v1[i]);
            u_f.push(self.state.u[i] + p.alpha_f * (u1 - self.state.u[i]));
            v_m.push(self.state.udot[i] + p.alpha_m * (v1[i] - self.state.udot[i]));
        }
        (t_f, u_f, v_m)
    }
}

impl<S: TransientSystem> NonlinearSystem for StageSystem<'_, S> {
    fn residual(&self, v1: &[f64]) -> Result<Vec<f64>, SolverError> {
        let (t_f, u_f, v_m) = self.stages(v1);
        self.sys.residual(t_f, &u_f, &v_m)
    }

    fn jacobian(&self, v1: &[f64]) -> Result<CsrMatrix, SolverError> {
        let p = &self.p;
        let (t_f, u_f, v_m) = self.stages(v1);
        // dR/dV = am dR/dUdot + af gamma dt dR/dU
        //       = af gamma dt (shift dR/dUdot + dR/dU).
        let scale = p.alpha_f * p.gamma * p.dt;
        let shift = p.alpha_m / scale;
        let mut jac = self.sys.jacobian(t_f, &u_f, &v_m, shift)?;
        for v in jac.values_mut() {
            *v *= scale;
        }
        Ok(jac)
    }
}

/// Advance one time step. The returned state satisfies the update identity
/// `U_{n+1} = U_n + dt ((1-gamma) Udot_n + gamma Udot_{n+1})` exactly by
/// construction, whatever the Newton convergence quality.
pub fn galpha_step<S: TransientSystem>(
    sys: &S,
    state: &TimeState,
    p: &AlphaParams,
    cfg: &SolverConfig,
    exec: ExecPolicy,
    blocks: &[Vec<usize>],
) -> Result<(TimeState, StepReport), SolverError> {
    // Constant-U predictor: Udot_{n+1}^(0) = (gamma - 1)/gamma Udot_n.
    let v0: Vec<f64> =
        state.udot.iter().map(|v| (p.gamma - 1.0) / p.gamma * v).collect();
    let stage = StageSystem { sys, state, p: *p };
    let out = newton_solve(&stage, v0, cfg, exec, blocks)?;
    if cfg.newton.fixed_iters.is_none() && !out.converged {
        return Err(SolverError::StepDiverged {
            t: state.t,
            iterations: out.iterations,
            residual: *out.residuals.last().unwrap_or(&f64::NAN),
        });
    }

    let v1 = out.u;
    let mut u1 = Vec::with_capacity(v1.len());
    for i in 0..v1.len() {
        u1.push(state.u[i] + p.dt * ((1.0 - p.gamma) * state.udot[i] + p.gamma * v1[i]));
    }
    let next = TimeState { t: state.t + p.dt, u: u1, udot: v1 };
    let report = StepReport {
        newton_iterations: out.iterations,
        gmres_iterations: out.gmres_iterations,
        converged: out.converged,
        residuals: out.residuals,
    };
    Ok((next, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_formulas() {
        let p = AlphaParams::new(1.0, 0.1).unwrap();
        assert_eq!((p.alpha_m, p.alpha_f, p.gamma), (0.5, 0.5, 0.5));
        let p = AlphaParams::new(0.0, 0.1).unwrap();
        assert_eq!((p.alpha_m, p.alpha_f, p.gamma), (1.5, 1.0, 1.0));
        let p = AlphaParams::new(0.5, 0.1).unwrap();
        assert!((p.alpha_m - 5.0 / 6.0).abs() < 1e-15);
        assert!((p.alpha_f - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.gamma - 2.0 / 3.0).abs() < 1e-15);
        // The defining identity holds exactly as computed.
        assert_eq!(p.gamma, 0.5 + p.alpha_m - p.alpha_f);
        assert!(AlphaParams::new(1.2, 0.1).is_err());
        assert!(AlphaParams::new(0.5, 0.0).is_err());
    }

    /// Scalar test problem udot = f(u).
    struct Ode<F, D>(F, D);

    impl<F, D> TransientSystem for Ode<F, D>
    where
        F: Fn(f64) -> f64 + Sync,
        D: Fn(f64) -> f64 + Sync,
    {
        fn residual(&self, _t: f64, u: &[f64], udot: &[f64]) -> Result<Vec<f64>, SolverError> {
            Ok(vec![udot[0] - (self.0)(u[0])])
        }
        fn jacobian(
            &self,
            _t: f64,
            u: &[f64],
            _udot: &[f64],
            shift: f64,
        ) -> Result<CsrMatrix, SolverError> {
            Ok(CsrMatrix::from_dense(&[vec![shift - (self.1)(u[0])]]))
        }
    }

    fn tight() -> SolverConfig {
        SolverConfig {
            gmres: crate::solvers::GmresConfig { rtol: 1e-14, atol: 1e-16, ..Default::default() },
            newton: crate::solvers::NewtonConfig {
                rtol: 1e-13,
                atol: 1e-15,
                ..Default::default()
            },
            blocks: None,
        }
    }

    #[test]
    fn constant_is_preserved() {
        // R = udot: the solution stays put for any parameters.
        let sys = Ode(|_u| 0.0, |_u| 0.0);
        let p = AlphaParams::new(0.3, 0.25).unwrap();
        let s0 = TimeState::new(0.0, vec![1.7]);
        let (s1, rep) = galpha_step(&sys, &s0, &p, &tight(), ExecPolicy::sequential(), &[vec![0]])
            .unwrap();
        assert!(rep.converged);
        assert_eq!(s1.u[0], 1.7);
    }

    #[test]
    fn rho_one_matches_trapezoidal() {
        let lambda = -0.8;
        let sys = Ode(move |u| lambda * u, move |_| lambda);
        let dt = 0.05;
        let p = AlphaParams::new(1.0, dt).unwrap();
        let mut s = TimeState::new(0.0, vec![1.0]);
        s.udot[0] = lambda; // consistent initial derivative
        let mut trap = 1.0f64;
        for _ in 0..10 {
            let (next, _) =
                galpha_step(&sys, &s, &p, &tight(), ExecPolicy::sequential(), &[vec![0]]).unwrap();
            s = next;
            trap *= (1.0 + lambda * dt / 2.0) / (1.0 - lambda * dt / 2.0);
            assert!((s.u[0] - trap).abs() < 1e-12, "step mismatch: {} vs {}", s.u[0], trap);
        }
    }

    #[test]
    fn update_identity_holds() {
        let sys = Ode(|u: f64| -u * u, |u: f64| -2.0 * u);
        let p = AlphaParams::new(0.5, 0.1).unwrap();
        let mut s = TimeState::new(0.0, vec![1.0]);
        s.udot[0] = -1.0;
        let (next, _) =
            galpha_step(&sys, &s, &p, &tight(), ExecPolicy::sequential(), &[vec![0]]).unwrap();
        let lhs = next.u[0];
        let rhs = s.u[0] + p.dt * ((1.0 - p.gamma) * s.udot[0] + p.gamma * next.udot[0]);
        assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs().max(1.0));
    }

    #[test]
    fn second_order_on_riccati() {
        // udot = -u^2, u(0) = 1, exact u(t) = 1/(1+t).
        let sys = Ode(|u: f64| -u * u, |u: f64| -2.0 * u);
        let run = |dt: f64| -> f64 {
            let p = AlphaParams::new(0.5, dt).unwrap();
            let mut s = TimeState::new(0.0, vec![1.0]);
            s.udot[0] = -1.0;
            let steps = (1.0 / dt).round() as usize;
            for _ in 0..steps {
                let (next, _) =
                    galpha_step(&sys, &s, &p, &tight(), ExecPolicy::sequential(), &[vec![0]])
                        .unwrap();
                s = next;
            }
            (s.u[0] - 0.5).abs()
        };
        let e1 = run(0.1);
        let e2 = run(0.05);
        let e3 = run(0.025);
        let order12 = (e1 / e2).log2();
        let order23 = (e2 / e3).log2();
        assert!(order12 > 1.9 && order23 > 1.9, "orders {order12:.2}, {order23:.2}");
    }
}
