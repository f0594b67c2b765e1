//! Tensor-product NURBS Galerkin engine.
//!
//! The crate is organized around the classic isogeometric pipeline:
//!
//! * [`splines`]: one-dimensional B-spline kernel (span search, Cox-de Boor
//!   evaluation with derivatives, knot/curve unclamping, adjacency stencils).
//! * [`nurbs`]: rational basis values and parametric derivatives up to third
//!   order built from B-spline tables and projective weights.
//! * [`space`]: tensor-product function spaces, periodic unclamping, element
//!   traversal, Gauss-Legendre quadrature and global dof numbering.
//! * [`geometry`]: isoparametric mapping, inverse-map derivatives and the
//!   push-forward of rational derivatives to spatial coordinates.
//! * [`assembly`]: worker partitioning, CSR preallocation from the adjacency
//!   graph, and partitioned vector/matrix assembly with contribution caches.
//! * [`solvers`]: restarted GMRES, block-Jacobi/ILU(0) preconditioning,
//!   Newton's method and the generalized-alpha time integrator.
//! * [`demos`]: reference applications (Poisson, Cahn-Hilliard, Neo-Hookean
//!   hyperelasticity), patch file I/O, VTK output and the scaling harness.
//!
//! With the default `parallel` feature the per-worker element loops and the
//! solver kernels run on rayon; without it the same code paths execute
//! sequentially and produce identical results.

pub mod assembly;
pub mod demos;
mod exec;
pub mod geometry;
pub mod linalg;
pub mod nurbs;
pub mod space;
pub mod sparse;
pub mod splines;
pub mod solvers;

pub use exec::{ExecPolicy, Execution};

/// Crate-wide error type aggregating the per-module failures.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Spline(#[from] splines::SplineError),
    #[error(transparent)]
    Nurbs(#[from] nurbs::NurbsError),
    #[error(transparent)]
    Space(#[from] space::SpaceError),
    #[error(transparent)]
    Geometry(#[from] geometry::GeometryError),
    #[error(transparent)]
    Assembly(#[from] assembly::AssemblyError),
    #[error(transparent)]
    Solver(#[from] solvers::SolverError),
    #[error(transparent)]
    Demo(#[from] demos::DemoError),
}

impl Error {
    /// Coarse exit-code category: 2 = invalid parameters or input files,
    /// 3 = numerical failure, 4 = I/O.
    pub fn category(&self) -> i32 {
        match self {
            Error::Spline(_) | Error::Space(_) | Error::Nurbs(_) => 2,
            Error::Geometry(_) | Error::Solver(_) => 3,
            Error::Assembly(e) => e.category(),
            Error::Demo(e) => e.category(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
