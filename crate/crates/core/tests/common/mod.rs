//! Independent oracles for the integration and acceptance suites.
//!
//! These deliberately avoid the optimized code paths they are used to check:
//! basis values come from the textbook recursion, matrices from a dense
//! accumulation with its own index arithmetic, and derivatives from finite
//! differences.

#![allow(dead_code)]

use iga::geometry::{evaluate_at, NurbsPatch};
use iga::linalg::{DenseLu, DenseMatrix};
use iga::space::TensorSpace;

/// Literal two-term recursion for one B-spline basis value, with the 0/0 -> 0
/// convention.
pub fn recursion_value(knots: &[f64], i: usize, p: usize, xi: f64) -> f64 {
    if p == 0 {
        return if knots[i] <= xi && xi < knots[i + 1] { 1.0 } else { 0.0 };
    }
    let mut v = 0.0;
    let da = knots[i + p] - knots[i];
    if da > 0.0 {
        v += (xi - knots[i]) / da * recursion_value(knots, i, p - 1, xi);
    }
    let db = knots[i + p + 1] - knots[i + 1];
    if db > 0.0 {
        v += (knots[i + p + 1] - xi) / db * recursion_value(knots, i + 1, p - 1, xi);
    }
    v
}

/// Derivative of the recursion by the classic difference formula, applied
/// recursively for higher orders.
pub fn recursion_derivative(knots: &[f64], i: usize, p: usize, xi: f64, order: usize) -> f64 {
    if order == 0 {
        return recursion_value(knots, i, p, xi);
    }
    if p == 0 {
        return 0.0;
    }
    let mut v = 0.0;
    let da = knots[i + p] - knots[i];
    if da > 0.0 {
        v += p as f64 / da * recursion_derivative(knots, i, p - 1, xi, order - 1);
    }
    let db = knots[i + p + 1] - knots[i + 1];
    if db > 0.0 {
        v -= p as f64 / db * recursion_derivative(knots, i + 1, p - 1, xi, order - 1);
    }
    v
}

/// Dense Galerkin matrix assembled with independent index arithmetic:
/// `kind` = 0 for mass (N_a N_b), 1 for stiffness (grad . grad).
pub fn dense_matrix_oracle(
    space: &TensorSpace,
    patch: &NurbsPatch,
    kind: usize,
) -> Vec<Vec<f64>> {
    let n = space.dof_count();
    let dim = space.dim();
    assert_eq!(space.dof_per_node(), 1, "oracle covers scalar spaces");
    let mut out = vec![vec![0.0; n]; n];
    for e in space.elements() {
        let rule = space.quadrature_rule(e).unwrap();
        for q in 0..rule.len() {
            let xi = rule.point(q);
            let pe = evaluate_at(space, patch, xi, 1).unwrap();
            let scale = pe.map.det.abs() * rule.weight(q);
            // Independent local-to-global map: wrap each axis index by hand.
            let dofs: Vec<usize> = pe
                .nodes
                .iter()
                .map(|node| {
                    let mut flat = 0;
                    for d in 0..dim {
                        let unique = space.axis(d).unique_count();
                        let wrapped = node[d] % unique;
                        flat = flat * unique + wrapped;
                    }
                    flat
                })
                .collect();
            for (a, &ga) in dofs.iter().enumerate() {
                for (b, &gb) in dofs.iter().enumerate() {
                    let v = match kind {
                        0 => pe.shapes.values[a] * pe.shapes.values[b],
                        _ => (0..dim)
                            .map(|i| {
                                pe.shapes.grad[a * dim + i] * pe.shapes.grad[b * dim + i]
                            })
                            .sum(),
                    };
                    out[ga][gb] += v * scale;
                }
            }
        }
    }
    out
}

/// Adjacency by brute force: nodes are adjacent when the assembled mass
/// matrix couples them.
pub fn adjacency_oracle(space: &TensorSpace, patch: &NurbsPatch) -> Vec<Vec<usize>> {
    let mass = dense_matrix_oracle(space, patch, 0);
    mass.iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(c, _)| c)
                .collect()
        })
        .collect()
}

/// Solve a dense system by LU, the reference for iterative solvers.
pub fn dense_solve(matrix: &[Vec<f64>], rhs: &[f64]) -> Vec<f64> {
    let n = matrix.len();
    let mut dm = DenseMatrix::zeros(n, n);
    for (r, row) in matrix.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            dm.set(r, c, v);
        }
    }
    DenseLu::factor(&dm).expect("oracle system nonsingular").solve(rhs)
}

/// Invert the geometric map by Newton iteration: find xi with x(xi) = target.
pub fn invert_map(
    space: &TensorSpace,
    patch: &NurbsPatch,
    target: [f64; 3],
    start: [f64; 3],
) -> [f64; 3] {
    let dim = space.dim();
    let mut xi = start;
    for _ in 0..50 {
        let pe = evaluate_at(space, patch, xi, 1).unwrap();
        let mut r = [0.0; 3];
        let mut norm: f64 = 0.0;
        for i in 0..dim {
            r[i] = pe.map.x[i] - target[i];
            norm = norm.max(r[i].abs());
        }
        if norm < 1e-14 {
            break;
        }
        // dxi[alpha][i] is the inverse Jacobian.
        for al in 0..dim {
            let mut step = 0.0;
            for i in 0..dim {
                step += pe.map.dxi[al][i] * r[i];
            }
            xi[al] -= step;
        }
        for d in 0..dim {
            let (lo, hi) = space.axis(d).knot_vector().domain();
            xi[d] = xi[d].clamp(lo, hi);
        }
    }
    xi
}

/// Deterministic xorshift for reproducible random data without pulling the
/// rand API into every test.
pub struct XorShift(pub u64);

impl XorShift {
    pub fn new(seed: u64) -> Self {
        XorShift(seed.max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    /// Uniform in [0, 1).
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn index(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// Random clamped knot vector with simple interior knots.
pub fn random_open_knots(rng: &mut XorShift, p: usize, interior: usize) -> Vec<f64> {
    let mut breaks: Vec<f64> = (0..interior).map(|_| rng.range(0.05, 0.95)).collect();
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    let mut knots = vec![0.0; p + 1];
    knots.extend(breaks);
    knots.extend(std::iter::repeat(1.0).take(p + 1));
    knots
}

pub use iga::geometry::map_point;

/// Finite-difference directional derivative of a vector function.
pub fn fd_directional(
    f: impl Fn(&[f64]) -> Vec<f64>,
    u: &[f64],
    dir: &[f64],
    eps: f64,
) -> Vec<f64> {
    let up: Vec<f64> = u.iter().zip(dir).map(|(a, d)| a + eps * d).collect();
    let um: Vec<f64> = u.iter().zip(dir).map(|(a, d)| a - eps * d).collect();
    let fp = f(&up);
    let fm = f(&um);
    fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * eps)).collect()
}

/// Least-squares slope of log(err) against log(h).
pub fn regression_order(hs: &[f64], errs: &[f64]) -> f64 {
    let n = hs.len() as f64;
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Keep the map oracle helpers together.
pub fn map_jacobian_fd(
    space: &TensorSpace,
    patch: &NurbsPatch,
    xi: [f64; 3],
    h: f64,
) -> [[f64; 3]; 3] {
    let dim = space.dim();
    let mut fd = [[0.0; 3]; 3];
    for al in 0..dim {
        let mut xp = xi;
        xp[al] += h;
        let mut xm = xi;
        xm[al] -= h;
        let fp = map_point(space, patch, xp).unwrap();
        let fm = map_point(space, patch, xm).unwrap();
        for i in 0..dim {
            fd[i][al] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    fd
}

pub fn assert_close(got: f64, expect: f64, tol: f64, what: &str) {
    assert!(
        (got - expect).abs() <= tol,
        "{what}: {got:e} vs {expect:e} (tol {tol:e})"
    );
}
