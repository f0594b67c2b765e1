//! Small dense linear algebra and vector kernels shared across the crate.
//!
//! The dense LU factorization backs boundary-data collocation and the test
//! oracles; the chunked vector kernels back the Krylov solver. Chunked
//! reductions accumulate per-chunk partial sums and fold them in chunk order,
//! so results are reproducible for a fixed policy.

use crate::exec::ExecPolicy;

/// Row-major dense matrix, sized on construction.
#[derive(Clone, Debug)]
pub struct DenseMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        DenseMatrix { nrows, ncols, data: vec![0.0; nrows * ncols] }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.ncols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.ncols + c] = v;
    }

    #[inline]
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.ncols + c] += v;
    }
}

/// Partial-pivot LU factorization stored in place.
pub struct DenseLu {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl DenseLu {
    /// Factor a square matrix. Fails on (numerically) singular input.
    pub fn factor(a: &DenseMatrix) -> Option<DenseLu> {
        assert_eq!(a.nrows, a.ncols);
        let n = a.nrows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut pivot = k;
            let mut best = lu.get(k, k).abs();
            for r in k + 1..n {
                let v = lu.get(r, k).abs();
                if v > best {
                    best = v;
                    pivot = r;
                }
            }
            if best == 0.0 {
                return None;
            }
            if pivot != k {
                for c in 0..n {
                    let t = lu.get(k, c);
                    lu.set(k, c, lu.get(pivot, c));
                    lu.set(pivot, c, t);
                }
                perm.swap(k, pivot);
            }
            let d = lu.get(k, k);
            for r in k + 1..n {
                let m = lu.get(r, k) / d;
                lu.set(r, k, m);
                for c in k + 1..n {
                    let v = lu.get(r, c) - m * lu.get(k, c);
                    lu.set(r, c, v);
                }
            }
        }
        Some(DenseLu { lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.nrows;
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 1..n {
            let mut s = x[r];
            for c in 0..r {
                s -= self.lu.get(r, c) * x[c];
            }
            x[r] = s;
        }
        for r in (0..n).rev() {
            let mut s = x[r];
            for c in r + 1..n {
                s -= self.lu.get(r, c) * x[c];
            }
            x[r] = s / self.lu.get(r, r);
        }
        x
    }
}

/// Invert a dim x dim matrix (dim <= 3) given as fixed 3x3 storage.
/// Returns the inverse and the determinant.
pub fn invert_small(dim: usize, m: &[[f64; 3]; 3]) -> ([[f64; 3]; 3], f64) {
    let mut inv = [[0.0; 3]; 3];
    let det;
    match dim {
        1 => {
            det = m[0][0];
            inv[0][0] = 1.0 / det;
        }
        2 => {
            det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let id = 1.0 / det;
            inv[0][0] = m[1][1] * id;
            inv[0][1] = -m[0][1] * id;
            inv[1][0] = -m[1][0] * id;
            inv[1][1] = m[0][0] * id;
        }
        3 => {
            let c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
            let c01 = m[1][2] * m[2][0] - m[1][0] * m[2][2];
            let c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
            det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
            let id = 1.0 / det;
            inv[0][0] = c00 * id;
            inv[1][0] = c01 * id;
            inv[2][0] = c02 * id;
            inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * id;
            inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * id;
            inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * id;
            inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * id;
            inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * id;
            inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * id;
        }
        _ => panic!("invert_small supports dims 1-3"),
    }
    (inv, det)
}

/// Minimum per-worker entries before a reduction is worth a parallel region.
const PAR_CHUNK_MIN: usize = 32_768;

pub fn dot(x: &[f64], y: &[f64], exec: &ExecPolicy) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    if exec.workers <= 1 || x.len() < PAR_CHUNK_MIN * exec.workers {
        return x.iter().zip(y).map(|(a, b)| a * b).sum();
    }
    let partials = exec.run(exec.workers.min(x.len()), |w| {
        let r = &exec.chunk_ranges(x.len())[w];
        x[r.clone()].iter().zip(&y[r.clone()]).map(|(a, b)| a * b).sum::<f64>()
    });
    partials.iter().sum()
}

pub fn norm2(x: &[f64], exec: &ExecPolicy) -> f64 {
    dot(x, x, exec).sqrt()
}

/// y += a * x
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// out = x + a * y
pub fn add_scaled(x: &[f64], a: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(xi, yi)| xi + a * yi).collect()
}

pub fn scale(x: &mut [f64], a: f64) {
    for v in x.iter_mut() {
        *v *= a;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_random_system() {
        let n = 12;
        let mut a = DenseMatrix::zeros(n, n);
        let mut seed = 0x2545F4914F6CDD1Du64;
        let mut rnd = || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for r in 0..n {
            for c in 0..n {
                a.set(r, c, rnd());
            }
            a.add(r, r, 4.0);
        }
        let xref: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let mut b = vec![0.0; n];
        for r in 0..n {
            b[r] = (0..n).map(|c| a.get(r, c) * xref[c]).sum();
        }
        let lu = DenseLu::factor(&a).unwrap();
        let x = lu.solve(&b);
        for (xi, ri) in x.iter().zip(&xref) {
            assert!((xi - ri).abs() < 1e-10);
        }
    }

    #[test]
    fn small_inverse_round_trip() {
        let m = [[2.0, 0.5, 0.1], [0.3, 1.5, 0.0], [0.0, 0.2, 3.0]];
        let (inv, det) = invert_small(3, &m);
        assert!(det > 0.0);
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| m[i][k] * inv[k][j]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn chunked_dot_matches_serial() {
        let x: Vec<f64> = (0..10000).map(|i| (i as f64).sin()).collect();
        let y: Vec<f64> = (0..10000).map(|i| (i as f64).cos()).collect();
        let serial = dot(&x, &y, &ExecPolicy::sequential());
        let par = dot(&x, &y, &ExecPolicy::parallel(4));
        assert!((serial - par).abs() < 1e-9);
    }
}
