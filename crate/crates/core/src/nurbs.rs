//! Rational basis values and parametric derivatives.
//!
//! Given tensor-product B-spline values `M_A` with parametric derivatives and
//! projective weights `w_A`, the rational basis is `R_A = w_A M_A / w` with
//! `w = sum_B w_B M_B`. First, second and third derivatives are computed with
//! the simplified recursive forms that reuse lower-order rational values:
//!
//! ```text
//! R_A,a   = (w_A M_A,a   - R_A w,a) / w
//! R_A,ab  = (w_A M_A,ab  - R_A w,ab  - R_A,b w,a - R_A,a w,b) / w
//! R_A,abc = (w_A M_A,abc - R_A w,abc
//!            - R_A,a w,bc - R_A,b w,ac - R_A,c w,ab
//!            - R_A,bc w,a - R_A,ac w,b - R_A,ab w,c) / w
//! ```
//!
//! Second- and third-order blocks are computed once per unordered index set
//! and mirrored, so the stored tensors are exactly symmetric.

use thiserror::Error;

use crate::space::TensorBasis;

#[derive(Debug, Error)]
pub enum NurbsError {
    #[error("projective weights must be strictly positive (weight[{index}] = {value})")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("weight function w(xi) = {value} is not positive")]
    DegenerateWeighting { value: f64 },
    #[error("weight count {got} does not match local function count {expect}")]
    WeightCountMismatch { got: usize, expect: usize },
}

/// Rational basis values and dense symmetric parametric-derivative blocks for
/// the local functions at one evaluation point.
///
/// Layouts are function-major: `d1[a*dim + i]`, `d2[(a*dim + i)*dim + j]`,
/// `d3[((a*dim + i)*dim + j)*dim + k]`.
#[derive(Clone, Debug, Default)]
pub struct RationalTable {
    pub dim: usize,
    pub count: usize,
    pub nderiv: usize,
    pub values: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub d3: Vec<f64>,
    pub weight_value: f64,
    pub weight_d1: [f64; 3],
    pub weight_d2: [[f64; 3]; 3],
    pub weight_d3: [[[f64; 3]; 3]; 3],
}

impl RationalTable {
    pub fn value(&self, a: usize) -> f64 {
        self.values[a]
    }

    pub fn grad(&self, a: usize) -> &[f64] {
        &self.d1[a * self.dim..(a + 1) * self.dim]
    }

    #[inline]
    pub fn d2_at(&self, a: usize, i: usize, j: usize) -> f64 {
        self.d2[(a * self.dim + i) * self.dim + j]
    }

    #[inline]
    pub fn d3_at(&self, a: usize, i: usize, j: usize, k: usize) -> f64 {
        self.d3[((a * self.dim + i) * self.dim + j) * self.dim + k]
    }
}

/// Evaluate the rational table from a tensor-product B-spline table and local
/// projective weights. `nderiv` picks how many derivative orders (0..=3) are
/// produced; the B-spline table must carry at least as many.
pub fn eval_rational(
    bspline: &TensorBasis,
    weights: &[f64],
    nderiv: usize,
) -> Result<RationalTable, NurbsError> {
    let mut table = RationalTable::default();
    eval_rational_into(&mut table, bspline, weights, nderiv)?;
    Ok(table)
}

/// In-place variant reusing the table's buffers in hot loops.
pub fn eval_rational_into(
    out: &mut RationalTable,
    bspline: &TensorBasis,
    weights: &[f64],
    nderiv: usize,
) -> Result<(), NurbsError> {
    let dim = bspline.dim;
    let count = bspline.count;
    assert!(nderiv <= bspline.nderiv, "B-spline table lacks derivative orders");
    if weights.len() != count {
        return Err(NurbsError::WeightCountMismatch { got: weights.len(), expect: count });
    }
    for (i, &w) in weights.iter().enumerate() {
        if !(w > 0.0) {
            return Err(NurbsError::NonPositiveWeight { index: i, value: w });
        }
    }

    out.dim = dim;
    out.count = count;
    out.nderiv = nderiv;
    out.values.clear();
    out.values.resize(count, 0.0);
    out.d1.clear();
    out.d2.clear();
    out.d3.clear();
    if nderiv >= 1 {
        out.d1.resize(count * dim, 0.0);
    }
    if nderiv >= 2 {
        out.d2.resize(count * dim * dim, 0.0);
    }
    if nderiv >= 3 {
        out.d3.resize(count * dim * dim * dim, 0.0);
    }

    // Weight function and its parametric derivatives.
    let mut w = 0.0;
    let mut w1 = [0.0f64; 3];
    let mut w2 = [[0.0f64; 3]; 3];
    let mut w3 = [[[0.0f64; 3]; 3]; 3];
    for a in 0..count {
        w += weights[a] * bspline.values[a];
    }
    if !(w > 0.0) {
        return Err(NurbsError::DegenerateWeighting { value: w });
    }
    if nderiv >= 1 {
        for i in 0..dim {
            let mut s = 0.0;
            for a in 0..count {
                s += weights[a] * bspline.d1[a * dim + i];
            }
            w1[i] = s;
        }
    }
    if nderiv >= 2 {
        for i in 0..dim {
            for j in i..dim {
                let mut s = 0.0;
                for a in 0..count {
                    s += weights[a] * bspline.d2[(a * dim + i) * dim + j];
                }
                w2[i][j] = s;
                w2[j][i] = s;
            }
        }
    }
    if nderiv >= 3 {
        for i in 0..dim {
            for j in i..dim {
                for k in j..dim {
                    let mut s = 0.0;
                    for a in 0..count {
                        s += weights[a] * bspline.d3[((a * dim + i) * dim + j) * dim + k];
                    }
                    for (p, q, r) in permutations3(i, j, k) {
                        w3[p][q][r] = s;
                    }
                }
            }
        }
    }

    let inv_w = 1.0 / w;
    for a in 0..count {
        out.values[a] = weights[a] * bspline.values[a] * inv_w;
    }
    if nderiv >= 1 {
        for a in 0..count {
            let wa = weights[a];
            let ra = out.values[a];
            for i in 0..dim {
                out.d1[a * dim + i] = (wa * bspline.d1[a * dim + i] - ra * w1[i]) * inv_w;
            }
        }
    }
    if nderiv >= 2 {
        for a in 0..count {
            let wa = weights[a];
            let ra = out.values[a];
            for i in 0..dim {
                for j in i..dim {
                    let v = (wa * bspline.d2[(a * dim + i) * dim + j]
                        - ra * w2[i][j]
                        - out.d1[a * dim + j] * w1[i]
                        - out.d1[a * dim + i] * w1[j])
                        * inv_w;
                    out.d2[(a * dim + i) * dim + j] = v;
                    out.d2[(a * dim + j) * dim + i] = v;
                }
            }
        }
    }
    if nderiv >= 3 {
        for a in 0..count {
            let wa = weights[a];
            let ra = out.values[a];
            for i in 0..dim {
                for j in i..dim {
                    for k in j..dim {
                        let v = (wa * bspline.d3[((a * dim + i) * dim + j) * dim + k]
                            - ra * w3[i][j][k]
                            - out.d1[a * dim + i] * w2[j][k]
                            - out.d1[a * dim + j] * w2[i][k]
                            - out.d1[a * dim + k] * w2[i][j]
                            - out.d2[(a * dim + j) * dim + k] * w1[i]
                            - out.d2[(a * dim + i) * dim + k] * w1[j]
                            - out.d2[(a * dim + i) * dim + j] * w1[k])
                            * inv_w;
                        for (p, q, r) in permutations3(i, j, k) {
                            out.d3[((a * dim + p) * dim + q) * dim + r] = v;
                        }
                    }
                }
            }
        }
    }

    out.weight_value = w;
    out.weight_d1 = w1;
    out.weight_d2 = w2;
    out.weight_d3 = w3;
    Ok(())
}

fn permutations3(i: usize, j: usize, k: usize) -> [(usize, usize, usize); 6] {
    [
        (i, j, k),
        (i, k, j),
        (j, i, k),
        (j, k, i),
        (k, i, j),
        (k, j, i),
    ]
}
