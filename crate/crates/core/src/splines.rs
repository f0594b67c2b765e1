//! One-dimensional B-spline kernel.
//!
//! A spline space is encoded by a non-decreasing knot sequence and a degree.
//! With `m + 1` knots and degree `p` there are `n + 1 = m - p` basis
//! functions. This module provides span search, evaluation of the non-zero
//! basis functions with derivatives up to third order, unclamping of knot
//! vectors and curves for periodic constructions, and the adjacency stencil
//! that drives sparse-matrix preallocation.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SplineError {
    #[error("parameter {xi} outside the knot domain [{lo}, {hi}]")]
    OutsideDomain { xi: f64, lo: f64, hi: f64 },
    #[error("knot vector must be non-decreasing (knots[{index}] > knots[{}])", index + 1)]
    NotMonotone { index: usize },
    #[error("need at least 2(p+1) = {need} knots for degree {degree}, got {got}")]
    TooFewKnots { degree: usize, need: usize, got: usize },
    #[error("degree {degree} exceeds the supported maximum {max}")]
    DegreeTooHigh { degree: usize, max: usize },
    #[error("knot {value} repeated {mult} times, more than degree+1 = {max}")]
    ExcessMultiplicity { value: f64, mult: usize, max: usize },
    #[error("continuity order {k} outside [0, {}] for degree {p}", p.saturating_sub(1))]
    InvalidContinuity { k: usize, p: usize },
    #[error("unclamping requires a clamped (open) knot vector")]
    NotClamped,
    #[error("degenerate knot configuration: zero denominator while unclamping control points")]
    DegenerateUnclamp,
    #[error("basis index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("control point count {got} does not match basis count {expect}")]
    ControlCountMismatch { got: usize, expect: usize },
}

/// Non-decreasing knot sequence with its polynomial degree.
#[derive(Clone, Debug, PartialEq)]
pub struct KnotVector {
    knots: Vec<f64>,
    degree: usize,
}

/// Values and parametric derivatives of the p+1 basis functions that do not
/// vanish on one knot span.
///
/// `values[j]` is `N_{span-p+j}` at the query point; `derivs[k-1][j]` is its
/// k-th derivative. Values sum to one and every derivative row sums to zero.
#[derive(Clone, Debug)]
pub struct BasisTable {
    pub span: usize,
    pub values: Vec<f64>,
    pub derivs: Vec<Vec<f64>>,
}

impl BasisTable {
    /// Index of the first non-vanishing basis function.
    pub fn first(&self, degree: usize) -> usize {
        self.span - degree
    }
}

/// Closed index range of basis functions whose support overlaps a given one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stencil {
    pub left: isize,
    pub right: isize,
}

impl Stencil {
    pub fn len(&self) -> usize {
        (self.right - self.left + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.right < self.left
    }

    pub fn iter(&self) -> impl Iterator<Item = isize> {
        self.left..=self.right
    }
}

/// Evaluation scratch is stack-allocated; this bounds the degree.
pub const MAX_DEGREE: usize = 7;

impl KnotVector {
    /// Validate and wrap a knot sequence.
    pub fn new(knots: Vec<f64>, degree: usize) -> Result<Self, SplineError> {
        if degree > MAX_DEGREE {
            return Err(SplineError::DegreeTooHigh { degree, max: MAX_DEGREE });
        }
        let need = 2 * (degree + 1);
        if knots.len() < need {
            return Err(SplineError::TooFewKnots { degree, need, got: knots.len() });
        }
        for i in 0..knots.len() - 1 {
            if knots[i] > knots[i + 1] {
                return Err(SplineError::NotMonotone { index: i });
            }
        }
        let mut run = 1;
        for i in 1..knots.len() {
            if knots[i] == knots[i - 1] {
                run += 1;
                if run > degree + 1 {
                    return Err(SplineError::ExcessMultiplicity {
                        value: knots[i],
                        mult: run,
                        max: degree + 1,
                    });
                }
            } else {
                run = 1;
            }
        }
        Ok(KnotVector { knots, degree })
    }

    /// Open uniform knot vector: `elements` equal spans on `[a, b]` with
    /// interior multiplicity `degree - continuity`.
    pub fn open_uniform(
        elements: usize,
        degree: usize,
        continuity: usize,
        a: f64,
        b: f64,
    ) -> Result<Self, SplineError> {
        if continuity > degree.saturating_sub(1) {
            return Err(SplineError::InvalidContinuity { k: continuity, p: degree });
        }
        let mult = degree - continuity;
        let mut knots = vec![a; degree + 1];
        for e in 1..elements {
            // Exact division keeps repeated knots bitwise identical.
            let t = a + (b - a) * (e as f64) / (elements as f64);
            for _ in 0..mult {
                knots.push(t);
            }
        }
        knots.extend(std::iter::repeat(b).take(degree + 1));
        KnotVector::new(knots, degree)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of basis functions, n + 1 = m - p.
    pub fn basis_count(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    /// Parametric domain `[U[p], U[n+1]]`.
    pub fn domain(&self) -> (f64, f64) {
        (self.knots[self.degree], self.knots[self.basis_count()])
    }

    /// True when both ends have full multiplicity p + 1.
    pub fn is_clamped(&self) -> bool {
        let p = self.degree;
        let m = self.knots.len() - 1;
        self.knots[0] == self.knots[p] && self.knots[m - p] == self.knots[m]
    }

    /// Knot-span indices of the non-empty spans inside the domain, one per
    /// element in parametric order.
    pub fn element_spans(&self) -> Vec<usize> {
        let n = self.basis_count() - 1;
        (self.degree..=n).filter(|&s| self.knots[s] < self.knots[s + 1]).collect()
    }

    /// Greville abscissa of basis function `i`: the average of its p
    /// interior support knots. Reproduces linear functions through
    /// coefficient identity.
    pub fn greville(&self, i: usize) -> f64 {
        let p = self.degree;
        if p == 0 {
            return 0.5 * (self.knots[i] + self.knots[i + 1]);
        }
        self.knots[i + 1..i + p + 1].iter().sum::<f64>() / p as f64
    }

    /// Find the knot span containing `xi`: returns `k` with
    /// `knots[k] <= xi < knots[k+1]`. The right domain endpoint maps to the
    /// last non-empty span.
    pub fn find_span(&self, xi: f64) -> Result<usize, SplineError> {
        let (lo, hi) = self.domain();
        if !(xi >= lo && xi <= hi) {
            return Err(SplineError::OutsideDomain { xi, lo, hi });
        }
        let n = self.basis_count() - 1;
        if xi >= self.knots[n + 1] {
            return Ok(n);
        }
        let mut low = self.degree;
        let mut high = n + 1;
        let mut mid = (low + high) / 2;
        while xi < self.knots[mid] || xi >= self.knots[mid + 1] {
            if xi < self.knots[mid] {
                high = mid;
            } else {
                low = mid;
            }
            mid = (low + high) / 2;
        }
        Ok(mid)
    }

    /// Evaluate the p+1 non-vanishing basis functions at `xi` together with
    /// parametric derivatives up to `nderiv` (at most 3). Derivative orders
    /// beyond the degree are identically zero.
    pub fn eval(&self, xi: f64, nderiv: usize) -> Result<BasisTable, SplineError> {
        let span = self.find_span(xi)?;
        Ok(self.eval_at_span(span, xi, nderiv))
    }

    /// In-place evaluation reusing the table's buffers.
    pub fn eval_into(
        &self,
        xi: f64,
        nderiv: usize,
        out: &mut BasisTable,
    ) -> Result<(), SplineError> {
        let span = self.find_span(xi)?;
        self.eval_at_span_into(span, xi, nderiv, out);
        Ok(())
    }

    /// Evaluation on an explicit span, also valid on the extension spans of
    /// an unclamped knot vector (`p <= span <= m - p`). Used for periodic
    /// wrap checks where the query point lies beyond the nominal domain.
    pub fn eval_at_span(&self, span: usize, xi: f64, nderiv: usize) -> BasisTable {
        let mut out = BasisTable { span, values: Vec::new(), derivs: Vec::new() };
        self.eval_at_span_into(span, xi, nderiv, &mut out);
        out
    }

    pub fn eval_at_span_into(&self, span: usize, xi: f64, nderiv: usize, out: &mut BasisTable) {
        let p = self.degree;
        let m = self.knots.len() - 1;
        assert!(span >= p && span + p <= m, "span lacks surrounding knots");
        let nd = nderiv.min(3);
        const W: usize = MAX_DEGREE + 1;

        // Triangular table of basis values and knot differences
        // ("The NURBS Book", A2.3 layout), on stack scratch.
        let mut ndu = [[0.0f64; W]; W];
        let mut left = [0.0f64; W];
        let mut right = [0.0f64; W];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = xi - self.knots[span + 1 - j];
            right[j] = self.knots[span + j] - xi;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }

        out.span = span;
        out.values.clear();
        out.values.extend((0..=p).map(|j| ndu[j][p]));
        out.derivs.resize_with(nd, Vec::new);
        for row in out.derivs.iter_mut() {
            row.clear();
            row.resize(p + 1, 0.0);
        }

        let kmax = nd.min(p);
        let mut a = [[0.0f64; W]; 2];
        for r in 0..=p {
            let mut s1 = 0usize;
            let mut s2 = 1usize;
            a[0][0] = 1.0;
            for k in 1..=kmax {
                let mut d = 0.0;
                let rk = r as isize - k as isize;
                let pk = p - k;
                if r >= k {
                    a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                    d = a[s2][0] * ndu[rk as usize][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if r as isize - 1 <= pk as isize { k - 1 } else { p - r };
                for j in j1..=j2 {
                    a[s2][j] =
                        (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][(rk + j as isize) as usize];
                    d += a[s2][j] * ndu[(rk + j as isize) as usize][pk];
                }
                if r <= pk {
                    a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                    d += a[s2][k] * ndu[r][pk];
                }
                out.derivs[k - 1][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        // Multiply through by p! / (p-k)!.
        let mut factor = p as f64;
        for k in 1..=kmax {
            for v in out.derivs[k - 1].iter_mut() {
                *v *= factor;
            }
            factor *= (p - k) as f64;
        }
    }

    /// Unclamp both ends for continuity order `k`, 0 <= k <= p-1. Interior
    /// knots are untouched; the result stays non-decreasing. The loop reads
    /// already-updated entries by construction, which is what produces the
    /// correct periodic extension when k approaches n.
    pub fn unclamp(&self, k: usize) -> Result<KnotVector, SplineError> {
        let p = self.degree;
        if p == 0 || k > p - 1 {
            return Err(SplineError::InvalidContinuity { k, p });
        }
        if !self.is_clamped() {
            return Err(SplineError::NotClamped);
        }
        let n = self.basis_count() - 1;
        let m = self.knots.len() - 1;
        let mut u = self.knots.clone();
        for i in 0..=k {
            u[k - i] = u[p] - u[n + 1] + u[n - i];
            u[m - k + i] = u[n + 1] - u[p] + u[p + i + 1];
        }
        KnotVector::new(u, p)
    }
}

/// Unclamp a curve in homogeneous coordinates for continuity order `k`.
///
/// The knots transform as in [`KnotVector::unclamp`]; the control points are
/// transformed by two triangular recurrences (left end first) so that the
/// curve restricted to the original parametric domain is unchanged. Extends
/// the classic full-order routine to an arbitrary target continuity.
pub fn unclamp_curve(
    kv: &KnotVector,
    ctrl: &[[f64; 4]],
    k: usize,
) -> Result<(KnotVector, Vec<[f64; 4]>), SplineError> {
    let p = kv.degree();
    if p == 0 || k > p - 1 {
        return Err(SplineError::InvalidContinuity { k, p });
    }
    if !kv.is_clamped() {
        return Err(SplineError::NotClamped);
    }
    let n = kv.basis_count() - 1;
    if ctrl.len() != n + 1 {
        return Err(SplineError::ControlCountMismatch { got: ctrl.len(), expect: n + 1 });
    }
    let m = kv.knots.len() - 1;
    let mut u = kv.knots.clone();
    let mut pw: Vec<[f64; 4]> = ctrl.to_vec();

    // Left end.
    for i in 0..=k {
        u[k - i] = u[p] - u[n + 1] + u[n - i];
    }
    if p >= 2 && k >= 1 {
        for i in p - k - 1..=p - 2 {
            for j in (0..=i).rev() {
                let den = u[p + j + 1] - u[p + j - i - 1];
                if den == 0.0 {
                    return Err(SplineError::DegenerateUnclamp);
                }
                let alpha = (u[p] - u[p + j - i - 1]) / den;
                if alpha == 1.0 {
                    return Err(SplineError::DegenerateUnclamp);
                }
                for c in 0..4 {
                    pw[j][c] = (pw[j][c] - alpha * pw[j + 1][c]) / (1.0 - alpha);
                }
            }
        }
    }

    // Right end.
    for i in 0..=k {
        u[m - k + i] = u[n + 1] - u[p] + u[p + i + 1];
    }
    if p >= 2 && k >= 1 {
        for i in p - k - 1..=p - 2 {
            for j in (0..=i).rev() {
                let den = u[n - j + i + 2] - u[n - j];
                if den == 0.0 {
                    return Err(SplineError::DegenerateUnclamp);
                }
                let alpha = (u[n + 1] - u[n - j]) / den;
                if alpha == 0.0 {
                    return Err(SplineError::DegenerateUnclamp);
                }
                for c in 0..4 {
                    pw[n - j][c] = (pw[n - j][c] - (1.0 - alpha) * pw[n - j - 1][c]) / alpha;
                }
            }
        }
    }

    Ok((KnotVector::new(u, p)?, pw))
}

/// Left-most and right-most basis indices whose support overlaps that of
/// basis function `i`. Knot comparisons are exact floating equality: repeated
/// knots must be bitwise identical, which the constructors guarantee.
pub fn basis_stencil(i: usize, kv: &KnotVector) -> Result<Stencil, SplineError> {
    let p = kv.degree();
    let n = kv.basis_count() - 1;
    if i > n {
        return Err(SplineError::IndexOutOfRange { index: i, max: n });
    }
    let u = kv.knots();
    let mut k = i;
    while u[k] == u[k + 1] {
        k += 1;
    }
    let left = k as isize - p as isize;
    let mut k = i + p + 1;
    while u[k] == u[k - 1] {
        k -= 1;
    }
    let right = k as isize - 1;
    Ok(Stencil { left, right })
}
