//! Reference applications and I/O: Poisson, Cahn-Hilliard, Neo-Hookean
//! hyperelasticity, patch files, VTK field output and the scaling harness.

mod cahn_hilliard;
mod hyperelastic;
mod patch_file;
mod poisson;
mod scaling;
mod vtk;

pub use cahn_hilliard::{
    cahn_hilliard_run, recommended_config as cahn_hilliard_config, CahnHilliardProblem,
    CahnHilliardReport, CahnHilliardSystem, ChMonitor, ChemicalPotential,
};
pub use hyperelastic::{
    face_displacement_bc, lame_constants, linear_elasticity_solve, neohookean_run,
    HyperelasticProblem, HyperelasticReport, LoadStepMonitor, NeoHookeanSystem,
};
pub use patch_file::{read_patch, write_patch};
pub use poisson::{poisson_run, PoissonProblem, PoissonReport};
pub use scaling::{scaling_bench, ScalingOptions, ScalingReport, ScalingRow};
pub use vtk::write_vtk;

use thiserror::Error;

use crate::assembly::{integrate, AssemblyError, Partition};
use crate::geometry::{GeometryError, NurbsPatch};
use crate::solvers::SolverError;
use crate::space::{SpaceError, TensorSpace};
use crate::splines::SplineError;

#[derive(Debug, Error)]
pub enum DemoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("failed to parse {path} (line {line}, column {column}): {detail}")]
    Parse { path: String, line: usize, column: usize, detail: String },
    #[error("invalid patch file: {field}: {detail}")]
    InvalidPatch { field: &'static str, detail: String },
    #[error("{stage}: solver did not converge ({detail})")]
    SolverFailure { stage: &'static str, detail: String },
    #[error("invalid demo configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

impl DemoError {
    pub fn category(&self) -> i32 {
        match self {
            DemoError::Io(_) => 4,
            DemoError::Parse { .. }
            | DemoError::InvalidPatch { .. }
            | DemoError::InvalidConfig(_) => 2,
            DemoError::SolverFailure { .. }
            | DemoError::Geometry(_)
            | DemoError::Solver(_) => 3,
            DemoError::Space(_) | DemoError::Spline(_) => 2,
            DemoError::Assembly(e) => e.category(),
        }
    }
}

/// L2 and H1-seminorm errors of a discrete field against a manufactured
/// solution, integrated with the space's quadrature.
#[derive(Clone, Copy, Debug)]
pub struct ErrorNorms {
    pub l2: f64,
    pub h1: f64,
}

pub fn solution_errors(
    space: &TensorSpace,
    part: &Partition,
    patch: &NurbsPatch,
    u: &[f64],
    exact: impl Fn([f64; 3]) -> f64 + Sync + Send,
    exact_grad: impl Fn([f64; 3]) -> [f64; 3] + Sync + Send,
) -> Result<ErrorNorms, DemoError> {
    let l2sq = integrate(space, part, patch, &[u], 1, |qp| {
        let e = qp.field_value(0, 0) - exact(qp.x);
        e * e
    })?;
    let h1sq = integrate(space, part, patch, &[u], 1, |qp| {
        let g = qp.field_grad(0, 0);
        let ge = exact_grad(qp.x);
        (0..space.dim()).map(|i| (g[i] - ge[i]) * (g[i] - ge[i])).sum()
    })?;
    Ok(ErrorNorms { l2: l2sq.sqrt(), h1: h1sq.sqrt() })
}

/// Per-node coefficients interpolating `g` composed with the patch map, by
/// tensor-product collocation at the Greville grid. Non-periodic spaces only.
pub fn interpolate_scalar(
    space: &TensorSpace,
    patch: &NurbsPatch,
    g: impl Fn([f64; 3]) -> f64,
) -> Result<Vec<f64>, DemoError> {
    assert!(
        (0..space.dim()).all(|d| !space.axis(d).is_periodic()),
        "interpolation targets non-periodic spaces"
    );
    let dim = space.dim();
    let counts = space.clamped_counts();
    let total: usize = counts[..dim].iter().product();
    let mut data: Vec<[f64; 3]> = Vec::with_capacity(total);
    for flat in 0..total {
        let mut node = [0usize; 3];
        let mut rest = flat;
        for d in (0..dim).rev() {
            node[d] = rest % counts[d];
            rest /= counts[d];
        }
        let mut xi = space.greville_point(node);
        for d in 0..dim {
            let (lo, hi) = space.axis(d).knot_vector().domain();
            xi[d] = xi[d].clamp(lo, hi);
        }
        let x = crate::geometry::map_point(space, patch, xi)?;
        data.push([g(x), 0.0, 0.0]);
    }
    let mut values = data;
    for d in 0..dim {
        let lu = crate::geometry::collocation_lu(space, d)?;
        solve_scalar_lines(&mut values, &counts, dim, d, &lu);
    }
    Ok(values.into_iter().map(|v| v[0]).collect())
}

fn solve_scalar_lines(
    data: &mut [[f64; 3]],
    counts: &[usize; 3],
    dim: usize,
    axis: usize,
    lu: &crate::linalg::DenseLu,
) {
    let n = counts[axis];
    let total: usize = counts[..dim].iter().product();
    let lines = total / n;
    for line in 0..lines {
        let mut other = [0usize; 3];
        let mut rest = line;
        for d in (0..dim).rev() {
            if d == axis {
                continue;
            }
            other[d] = rest % counts[d];
            rest /= counts[d];
        }
        let mut idx = Vec::with_capacity(n);
        for i in 0..n {
            let mut node = other;
            node[axis] = i;
            let mut f = 0;
            for d in 0..dim {
                f = f * counts[d] + node[d];
            }
            idx.push(f);
        }
        let rhs: Vec<f64> = idx.iter().map(|&f| data[f][0]).collect();
        let sol = lu.solve(&rhs);
        for (i, &f) in idx.iter().enumerate() {
            data[f][0] = sol[i];
        }
    }
}

/// Dirichlet pairs `(dof, value)` for component `comp` on every non-periodic
/// boundary face, values interpolated from `g` in physical coordinates.
pub fn dirichlet_boundary(
    space: &TensorSpace,
    patch: &NurbsPatch,
    comp: usize,
    g: impl Fn([f64; 3]) -> f64,
) -> Result<Vec<(usize, f64)>, DemoError> {
    let coeffs = interpolate_scalar(space, patch, g)?;
    let dpn = space.dof_per_node();
    let mut bc = Vec::new();
    for d in 0..space.dim() {
        if space.axis(d).is_periodic() {
            continue;
        }
        for high in [false, true] {
            for node in space.boundary_nodes(d, high) {
                let idx = space.node_index(node)?;
                bc.push((idx * dpn + comp, coeffs[idx]));
            }
        }
    }
    bc.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    bc.dedup_by(|a, b| a.0 == b.0);
    Ok(bc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::AxisSpec;

    #[test]
    fn interpolation_reproduces_polynomials_in_space() {
        let space = TensorSpace::build(
            &[AxisSpec::open(3, 2, 1), AxisSpec::open(4, 2, 1)],
            1,
        )
        .unwrap();
        let patch = NurbsPatch::greville_identity(&space);
        let part = Partition::new(&space, 1).unwrap();
        // Biquadratic polynomial lies in the space: interpolation is exact.
        let coeffs =
            interpolate_scalar(&space, &patch, |x| x[0] * x[0] + 0.5 * x[0] * x[1] - x[1]).unwrap();
        let err = integrate(&space, &part, &patch, &[&coeffs], 1, |qp| {
            let e =
                qp.field_value(0, 0) - (qp.x[0] * qp.x[0] + 0.5 * qp.x[0] * qp.x[1] - qp.x[1]);
            e * e
        })
        .unwrap();
        assert!(err.sqrt() < 1e-12);
    }

    #[test]
    fn boundary_values_cover_all_faces() {
        let space = TensorSpace::build(
            &[AxisSpec::open(3, 2, 1), AxisSpec::open(3, 2, 1)],
            1,
        )
        .unwrap();
        let patch = NurbsPatch::greville_identity(&space);
        let bc = dirichlet_boundary(&space, &patch, 0, |_| 1.5).unwrap();
        let n = space.node_counts();
        assert_eq!(bc.len(), 2 * n[0] + 2 * n[1] - 4);
        assert!(bc.iter().all(|&(_, v)| (v - 1.5).abs() < 1e-12));
    }
}
