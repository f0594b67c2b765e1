//! Isoparametric geometry: the NURBS map, its inverse-map derivatives up to
//! third order, and the push-forward of rational basis derivatives from
//! parametric to spatial coordinates.
//!
//! Parametric and spatial dimension are equal (1-3), so the map Jacobian is
//! square and inverted in closed form. The inverse-map derivative identities
//! follow from differentiating `delta_mn = x_{m,gamma} xi_{gamma,n}`:
//!
//! ```text
//! xi_{nu,nl}  = - x_{m,eu} xi_{e,n} xi_{u,l} xi_{nu,m}
//! xi_{nu,nlo} = - x_{m,euw} xi_{e,n} xi_{u,l} xi_{nu,m} xi_{w,o}
//!               - x_{m,eu} (xi_{e,no} xi_{u,l} xi_{nu,m}
//!                         + xi_{e,n} xi_{u,lo} xi_{nu,m}
//!                         + xi_{e,n} xi_{u,l} xi_{nu,mo})
//! ```

use thiserror::Error;

use crate::linalg::{invert_small, DenseLu, DenseMatrix};
use crate::nurbs::{eval_rational_into, RationalTable};
use crate::space::{AxisSpec, SpaceError, TensorBasis, TensorSpace};

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("singular geometric mapping: |det| = {det:e} below threshold {threshold:e}")]
    SingularMap { det: f64, threshold: f64 },
    #[error("control net extents {got:?} do not match the space's basis counts {expect:?}")]
    ControlExtentMismatch { got: [usize; 3], expect: [usize; 3] },
    #[error("patch weights must be strictly positive (weight[{index}] = {value})")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("control point count {got} does not match extents product {expect}")]
    ControlCountMismatch { got: usize, expect: usize },
    #[error("operation needs derivative order {need}, only {have} available")]
    MissingDerivatives { need: usize, have: usize },
    #[error("spatial dimension must be 1-3, got {got}")]
    Dimension { got: usize },
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Nurbs(#[from] crate::nurbs::NurbsError),
    #[error(transparent)]
    Spline(#[from] crate::splines::SplineError),
}

/// Control net with projective weights, aligned with the clamped basis
/// counts of a tensor space (node-major, last axis fastest). Stored in
/// homogeneous coordinates `(x w, y w, z w, w)`, the same convention the
/// curve-unclamping transformation acts on.
#[derive(Clone, Debug)]
pub struct NurbsPatch {
    dim: usize,
    counts: [usize; 3],
    pw: Vec<[f64; 4]>,
}

/// Geometry coefficients gathered for one element, in local function order.
#[derive(Clone, Debug, Default)]
pub struct ElementGeometry {
    pub dim: usize,
    pub ctrl: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

/// The geometric map and its derivatives at one point.
///
/// `dx[i][a] = d x_i / d xi_a`; `dxi[a][i] = d xi_a / d x_i` is its matrix
/// inverse, so `dx . dxi` is the identity. Higher blocks are symmetric in
/// their trailing indices.
#[derive(Clone, Debug, Default)]
pub struct MapDerivatives {
    pub dim: usize,
    /// Available parametric derivative orders of the map (1..=3).
    pub nderiv: usize,
    /// Available inverse-map derivative orders (set by `inverse_map_higher`).
    pub inv_nderiv: usize,
    pub x: [f64; 3],
    pub dx: [[f64; 3]; 3],
    pub dx2: [[[f64; 3]; 3]; 3],
    pub dx3: [[[[f64; 3]; 3]; 3]; 3],
    pub det: f64,
    pub dxi: [[f64; 3]; 3],
    pub dxi2: [[[f64; 3]; 3]; 3],
    pub dxi3: [[[[f64; 3]; 3]; 3]; 3],
}

/// Basis values and spatial derivatives at one point, plus the mapping
/// determinant. Layouts are function-major as in [`RationalTable`].
#[derive(Clone, Debug, Default)]
pub struct ShapeBundle {
    pub dim: usize,
    pub count: usize,
    pub nderiv: usize,
    pub values: Vec<f64>,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
    pub third: Vec<f64>,
    pub det: f64,
}

impl ShapeBundle {
    #[inline]
    pub fn value(&self, a: usize) -> f64 {
        self.values[a]
    }

    #[inline]
    pub fn grad_at(&self, a: usize) -> &[f64] {
        &self.grad[a * self.dim..(a + 1) * self.dim]
    }

    #[inline]
    pub fn hess_at(&self, a: usize, i: usize, j: usize) -> f64 {
        self.hess[(a * self.dim + i) * self.dim + j]
    }

    #[inline]
    pub fn third_at(&self, a: usize, i: usize, j: usize, k: usize) -> f64 {
        self.third[((a * self.dim + i) * self.dim + j) * self.dim + k]
    }

    pub fn laplacian(&self, a: usize) -> f64 {
        (0..self.dim).map(|i| self.hess_at(a, i, i)).sum()
    }
}

impl NurbsPatch {
    pub fn new(
        dim: usize,
        counts: [usize; 3],
        ctrl: Vec<[f64; 3]>,
        weights: Vec<f64>,
    ) -> Result<Self, GeometryError> {
        if ctrl.len() != weights.len() {
            return Err(GeometryError::ControlCountMismatch {
                got: ctrl.len().min(weights.len()),
                expect: ctrl.len().max(weights.len()),
            });
        }
        let pw = ctrl
            .into_iter()
            .zip(&weights)
            .map(|(c, &w)| [c[0] * w, c[1] * w, c[2] * w, w])
            .collect();
        Self::from_homogeneous(dim, counts, pw)
    }

    /// Build directly from homogeneous rows `(x w, y w, z w, w)`.
    pub fn from_homogeneous(
        dim: usize,
        counts: [usize; 3],
        pw: Vec<[f64; 4]>,
    ) -> Result<Self, GeometryError> {
        if dim == 0 || dim > 3 {
            return Err(GeometryError::Dimension { got: dim });
        }
        let expect: usize = counts[..dim].iter().product();
        if pw.len() != expect {
            return Err(GeometryError::ControlCountMismatch { got: pw.len(), expect });
        }
        for (i, row) in pw.iter().enumerate() {
            if !(row[3] > 0.0) {
                return Err(GeometryError::NonPositiveWeight { index: i, value: row[3] });
            }
        }
        let mut c = counts;
        c[dim..].iter_mut().for_each(|v| *v = 1);
        Ok(NurbsPatch { dim, counts: c, pw })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn counts(&self) -> [usize; 3] {
        self.counts
    }

    pub fn homogeneous(&self) -> &[[f64; 4]] {
        &self.pw
    }

    /// Physical control points (homogeneous coordinates divided by weight).
    pub fn control_points(&self) -> Vec<[f64; 3]> {
        self.pw
            .iter()
            .map(|p| [p[0] / p[3], p[1] / p[3], p[2] / p[3]])
            .collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.pw.iter().map(|p| p[3]).collect()
    }

    #[inline]
    pub fn node_flat(&self, node: [usize; 3]) -> usize {
        let mut f = 0;
        for d in 0..self.dim {
            f = f * self.counts[d] + node[d];
        }
        f
    }

    /// Isoparametric contract: control extents must match the space's
    /// clamped basis counts.
    pub fn validate_for(&self, space: &TensorSpace) -> Result<(), GeometryError> {
        let expect = space.clamped_counts();
        if self.dim != space.dim() || self.counts != expect {
            return Err(GeometryError::ControlExtentMismatch { got: self.counts, expect });
        }
        Ok(())
    }

    /// Gather the control points and weights of an element's local functions.
    pub fn gather(&self, nodes: &[[usize; 3]]) -> ElementGeometry {
        let mut geo = ElementGeometry {
            dim: self.dim,
            ctrl: Vec::with_capacity(nodes.len()),
            weights: Vec::with_capacity(nodes.len()),
        };
        self.gather_into(nodes, &mut geo);
        geo
    }

    pub fn gather_into(&self, nodes: &[[usize; 3]], geo: &mut ElementGeometry) {
        geo.dim = self.dim;
        geo.ctrl.clear();
        geo.weights.clear();
        for &n in nodes {
            let p = &self.pw[self.node_flat(n)];
            let w = p[3];
            geo.ctrl.push([p[0] / w, p[1] / w, p[2] / w]);
            geo.weights.push(w);
        }
    }

    /// Identity map on the space's parametric domain: control points at the
    /// per-axis Greville abscissae, unit weights. Exact by linear precision,
    /// including on periodic (unclamped) axes.
    pub fn greville_identity(space: &TensorSpace) -> Self {
        Self::greville_mapped(space, |xi| xi)
    }

    /// Control points from an affine image of the Greville grid. Exact for
    /// affine maps only; use [`interpolate`](Self::interpolate) otherwise.
    pub fn greville_mapped(space: &TensorSpace, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let counts = space.clamped_counts();
        let dim = space.dim();
        let total: usize = counts[..dim].iter().product();
        let mut pw = Vec::with_capacity(total);
        for flat in 0..total {
            let node = unflatten(flat, &counts, dim);
            let x = f(space.greville_point(node));
            pw.push([x[0], x[1], x[2], 1.0]);
        }
        let mut c = counts;
        c[dim..].iter_mut().for_each(|v| *v = 1);
        NurbsPatch { dim, counts: c, pw }
    }

    /// Interpolate a smooth map by tensor-product collocation at the
    /// Greville grid (one banded solve per grid line and axis).
    pub fn interpolate(
        space: &TensorSpace,
        f: impl Fn([f64; 3]) -> [f64; 3],
    ) -> Result<Self, GeometryError> {
        let dim = space.dim();
        let counts = space.clamped_counts();
        let total: usize = counts[..dim].iter().product();
        let mut data: Vec<[f64; 3]> = Vec::with_capacity(total);
        for flat in 0..total {
            let node = unflatten(flat, &counts, dim);
            data.push(f(space.greville_point(node)));
        }
        for d in 0..dim {
            let lu = collocation_lu(space, d)?;
            solve_lines(&mut data, &counts, dim, d, &lu);
        }
        NurbsPatch::new(dim, counts, data, vec![1.0; total])
    }
}

fn unflatten(flat: usize, counts: &[usize; 3], dim: usize) -> [usize; 3] {
    let mut node = [0usize; 3];
    let mut rest = flat;
    for d in (0..dim).rev() {
        node[d] = rest % counts[d];
        rest /= counts[d];
    }
    node
}

/// LU factorization of the Greville collocation matrix of one axis.
pub(crate) fn collocation_lu(space: &TensorSpace, axis: usize) -> Result<DenseLu, GeometryError> {
    let kv = space.axis(axis).knot_vector();
    let n = kv.basis_count();
    let p = kv.degree();
    let mut b = DenseMatrix::zeros(n, n);
    let (lo, hi) = kv.domain();
    for row in 0..n {
        let g = kv.greville(row).clamp(lo, hi);
        let t = kv.eval(g, 0)?;
        let first = t.first(p);
        for (j, v) in t.values.iter().enumerate() {
            b.set(row, first + j, *v);
        }
    }
    DenseLu::factor(&b).ok_or(GeometryError::SingularMap { det: 0.0, threshold: 0.0 })
}

/// Solve collocation systems along every grid line of `axis`, in place.
fn solve_lines(
    data: &mut [[f64; 3]],
    counts: &[usize; 3],
    dim: usize,
    axis: usize,
    lu: &DenseLu,
) {
    let n = counts[axis];
    let total: usize = counts[..dim].iter().product();
    let lines = total / n;
    let mut line_idx = vec![0usize; n];
    for line in 0..lines {
        // Enumerate the flat indices of this line by fixing all other axes.
        let mut other = [0usize; 3];
        let mut rest = line;
        for d in (0..dim).rev() {
            if d == axis {
                continue;
            }
            other[d] = rest % counts[d];
            rest /= counts[d];
        }
        for (i, slot) in line_idx.iter_mut().enumerate() {
            let mut node = other;
            node[axis] = i;
            let mut f = 0;
            for d in 0..dim {
                f = f * counts[d] + node[d];
            }
            *slot = f;
        }
        for c in 0..3 {
            let rhs: Vec<f64> = line_idx.iter().map(|&f| data[f][c]).collect();
            let sol = lu.solve(&rhs);
            for (i, &f) in line_idx.iter().enumerate() {
                data[f][c] = sol[i];
            }
        }
    }
}

/// Map point, first parametric derivatives, Jacobian determinant and the
/// inverse Jacobian. Higher parametric derivatives of the map are filled when
/// the rational table carries them.
pub fn map_and_jacobian(
    geo: &ElementGeometry,
    rt: &RationalTable,
) -> Result<MapDerivatives, GeometryError> {
    let mut md = MapDerivatives::default();
    map_and_jacobian_into(&mut md, geo, rt)?;
    Ok(md)
}

pub fn map_and_jacobian_into(
    md: &mut MapDerivatives,
    geo: &ElementGeometry,
    rt: &RationalTable,
) -> Result<(), GeometryError> {
    let dim = geo.dim;
    if rt.nderiv < 1 {
        return Err(GeometryError::MissingDerivatives { need: 1, have: rt.nderiv });
    }
    *md = MapDerivatives { dim, nderiv: rt.nderiv.min(3), ..Default::default() };
    for (a, (c, _w)) in geo.ctrl.iter().zip(&geo.weights).enumerate() {
        let ra = rt.value(a);
        for i in 0..dim {
            md.x[i] += c[i] * ra;
        }
        let g = rt.grad(a);
        for i in 0..dim {
            for al in 0..dim {
                md.dx[i][al] += c[i] * g[al];
            }
        }
        if md.nderiv >= 2 {
            for i in 0..dim {
                for al in 0..dim {
                    for be in al..dim {
                        let v = c[i] * rt.d2_at(a, al, be);
                        md.dx2[i][al][be] += v;
                        if al != be {
                            md.dx2[i][be][al] += v;
                        }
                    }
                }
            }
        }
        if md.nderiv >= 3 {
            for i in 0..dim {
                for al in 0..dim {
                    for be in 0..dim {
                        for ga in 0..dim {
                            md.dx3[i][al][be][ga] += c[i] * rt.d3_at(a, al, be, ga);
                        }
                    }
                }
            }
        }
    }

    let scale = md.dx[..dim]
        .iter()
        .flat_map(|r| r[..dim].iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .powi(dim as i32);
    let (inv, det) = invert_small(dim, &md.dx);
    let threshold = 1e-14 * scale;
    if !(det.abs() > threshold) || !det.is_finite() {
        return Err(GeometryError::SingularMap { det, threshold });
    }
    // dxi[alpha][i] = (dx^-1)[alpha][i].
    md.dxi = inv;
    md.det = det;
    md.inv_nderiv = 1;
    Ok(())
}

/// Fill the second (and third, when available) derivatives of the inverse
/// map by the contraction identities.
pub fn inverse_map_higher(md: &mut MapDerivatives) -> Result<(), GeometryError> {
    let dim = md.dim;
    if md.nderiv < 2 {
        return Err(GeometryError::MissingDerivatives { need: 2, have: md.nderiv });
    }
    for nu in 0..dim {
        for n in 0..dim {
            for l in n..dim {
                let mut s = 0.0;
                for m in 0..dim {
                    for e in 0..dim {
                        for u in 0..dim {
                            s += md.dx2[m][e][u] * md.dxi[e][n] * md.dxi[u][l] * md.dxi[nu][m];
                        }
                    }
                }
                md.dxi2[nu][n][l] = -s;
                md.dxi2[nu][l][n] = -s;
            }
        }
    }
    md.inv_nderiv = 2;

    if md.nderiv >= 3 {
        for nu in 0..dim {
            for n in 0..dim {
                for l in n..dim {
                    for o in l..dim {
                        let mut s = 0.0;
                        for m in 0..dim {
                            for e in 0..dim {
                                for u in 0..dim {
                                    for w in 0..dim {
                                        s += md.dx3[m][e][u][w]
                                            * md.dxi[e][n]
                                            * md.dxi[u][l]
                                            * md.dxi[nu][m]
                                            * md.dxi[w][o];
                                    }
                                    s += md.dx2[m][e][u]
                                        * (md.dxi2[e][n][o] * md.dxi[u][l] * md.dxi[nu][m]
                                            + md.dxi[e][n] * md.dxi2[u][l][o] * md.dxi[nu][m]
                                            + md.dxi[e][n] * md.dxi[u][l] * md.dxi2[nu][m][o]);
                                }
                            }
                        }
                        for (a, b, c) in
                            [(n, l, o), (n, o, l), (l, n, o), (l, o, n), (o, n, l), (o, l, n)]
                        {
                            md.dxi3[nu][a][b][c] = -s;
                        }
                    }
                }
            }
        }
        md.inv_nderiv = 3;
    }
    Ok(())
}

/// Push parametric derivatives of the rational basis forward to spatial
/// coordinates:
///
/// ```text
/// R_A,i   = R_A,a xi_a,i
/// R_A,ij  = R_A,ab xi_a,i xi_b,j + R_A,a xi_a,ij
/// R_A,ijk = R_A,abc xi_a,i xi_b,j xi_c,k
///         + R_A,ab (xi_a,i xi_b,jk + xi_b,j xi_a,ik + xi_b,k xi_a,ij)
///         + R_A,a xi_a,ijk
/// ```
pub fn push_forward(
    rt: &RationalTable,
    md: &MapDerivatives,
    nderiv: usize,
) -> Result<ShapeBundle, GeometryError> {
    let mut sb = ShapeBundle::default();
    push_forward_into(&mut sb, rt, md, nderiv)?;
    Ok(sb)
}

pub fn push_forward_into(
    sb: &mut ShapeBundle,
    rt: &RationalTable,
    md: &MapDerivatives,
    nderiv: usize,
) -> Result<(), GeometryError> {
    let dim = md.dim;
    let count = rt.count;
    if nderiv < 1 || nderiv > 3 {
        return Err(GeometryError::MissingDerivatives { need: nderiv, have: 3 });
    }
    if rt.nderiv < nderiv {
        return Err(GeometryError::MissingDerivatives { need: nderiv, have: rt.nderiv });
    }
    if md.inv_nderiv < nderiv {
        return Err(GeometryError::MissingDerivatives { need: nderiv, have: md.inv_nderiv });
    }
    sb.dim = dim;
    sb.count = count;
    sb.nderiv = nderiv;
    sb.det = md.det;
    sb.values.clear();
    sb.values.extend_from_slice(&rt.values);
    sb.grad.clear();
    sb.grad.resize(count * dim, 0.0);
    sb.hess.clear();
    sb.third.clear();
    if nderiv >= 2 {
        sb.hess.resize(count * dim * dim, 0.0);
    }
    if nderiv >= 3 {
        sb.third.resize(count * dim * dim * dim, 0.0);
    }

    for a in 0..count {
        let g = rt.grad(a);
        for i in 0..dim {
            let mut s = 0.0;
            for al in 0..dim {
                s += g[al] * md.dxi[al][i];
            }
            sb.grad[a * dim + i] = s;
        }
        if nderiv >= 2 {
            for i in 0..dim {
                for j in i..dim {
                    let mut s = 0.0;
                    for al in 0..dim {
                        for be in 0..dim {
                            s += rt.d2_at(a, al, be) * md.dxi[al][i] * md.dxi[be][j];
                        }
                        s += g[al] * md.dxi2[al][i][j];
                    }
                    sb.hess[(a * dim + i) * dim + j] = s;
                    sb.hess[(a * dim + j) * dim + i] = s;
                }
            }
        }
        if nderiv >= 3 {
            for i in 0..dim {
                for j in i..dim {
                    for k in j..dim {
                        let mut s = 0.0;
                        for al in 0..dim {
                            for be in 0..dim {
                                for ga in 0..dim {
                                    s += rt.d3_at(a, al, be, ga)
                                        * md.dxi[al][i]
                                        * md.dxi[be][j]
                                        * md.dxi[ga][k];
                                }
                                s += rt.d2_at(a, al, be)
                                    * (md.dxi[al][i] * md.dxi2[be][j][k]
                                        + md.dxi[be][j] * md.dxi2[al][i][k]
                                        + md.dxi[be][k] * md.dxi2[al][i][j]);
                            }
                            s += g[al] * md.dxi3[al][i][j][k];
                        }
                        for (p, q, r) in
                            [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)]
                        {
                            sb.third[((a * dim + p) * dim + q) * dim + r] = s;
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Full evaluation pipeline at one parametric point: basis tables, rational
/// basis, map derivatives and spatial shape functions. Convenience for
/// output sampling, error integration and derivative checks; assembly runs
/// an allocation-free equivalent internally.
pub struct PointEval {
    pub nodes: Vec<[usize; 3]>,
    pub rational: RationalTable,
    pub map: MapDerivatives,
    pub shapes: ShapeBundle,
}

pub fn evaluate_at(
    space: &TensorSpace,
    patch: &NurbsPatch,
    xi: [f64; 3],
    nderiv: usize,
) -> Result<PointEval, GeometryError> {
    patch.validate_for(space)?;
    let dim = space.dim();
    let mut tables = Vec::with_capacity(dim);
    for d in 0..dim {
        tables.push(space.axis(d).knot_vector().eval(xi[d], nderiv)?);
    }
    let spans: Vec<usize> = tables.iter().map(|t| t.span).collect();
    let refs: Vec<&crate::splines::BasisTable> = tables.iter().collect();
    let tb = TensorBasis::combine(&refs, nderiv);

    // Local clamped node multi-indices, last axis fastest.
    let counts: Vec<usize> = (0..dim).map(|d| space.axis(d).degree() + 1).collect();
    let total: usize = counts.iter().product();
    let mut nodes = Vec::with_capacity(total);
    for l in 0..total {
        let mut m = [0usize; 3];
        let mut rest = l;
        for d in (0..dim).rev() {
            m[d] = spans[d] - space.axis(d).degree() + rest % counts[d];
            rest /= counts[d];
        }
        nodes.push(m);
    }

    let geo = patch.gather(&nodes);
    let mut rational = RationalTable::default();
    eval_rational_into(&mut rational, &tb, &geo.weights, nderiv)?;
    let mut map = map_and_jacobian(&geo, &rational)?;
    if nderiv >= 2 {
        inverse_map_higher(&mut map)?;
    }
    let shapes = push_forward(&rational, &map, nderiv)?;
    Ok(PointEval { nodes, rational, map, shapes })
}

/// Physical image of a parametric point.
pub fn map_point(
    space: &TensorSpace,
    patch: &NurbsPatch,
    xi: [f64; 3],
) -> Result<[f64; 3], GeometryError> {
    Ok(evaluate_at(space, patch, xi, 1)?.map.x)
}

/// Exact quarter annulus (inner radius 1, outer radius 2) as a quadratic
/// NURBS patch with `n_r x n_t` elements: linear-in-parameter radius times a
/// circular arc split into `n_t` rational segments. The matching space is C1
/// in the radial direction and C0 across the angular segment joints.
pub fn quarter_annulus(
    n_r: usize,
    n_t: usize,
    dof_per_node: usize,
) -> Result<(TensorSpace, NurbsPatch), GeometryError> {
    let space = TensorSpace::build(
        &[AxisSpec::open(n_r, 2, 1), AxisSpec::open(n_t, 2, 0)],
        dof_per_node,
    )?;
    let counts = space.clamped_counts();
    let radial = space.axis(0).knot_vector();
    let radii: Vec<f64> = (0..counts[0]).map(|i| 1.0 + radial.greville(i)).collect();

    // Homogeneous angular data: on-circle points carry weight 1; the tangent
    // intersection at each segment midpoint has cartesian radius r/cos(h)
    // and weight cos(h), so its homogeneous row is simply r * direction.
    let seg = std::f64::consts::FRAC_PI_2 / n_t as f64;
    let half_cos = (0.5 * seg).cos();
    let mut ang = Vec::with_capacity(counts[1]);
    for j in 0..counts[1] {
        if j % 2 == 0 {
            let th = (j / 2) as f64 * seg;
            ang.push(([th.cos(), th.sin()], 1.0));
        } else {
            let th = ((j / 2) as f64 + 0.5) * seg;
            ang.push(([th.cos(), th.sin()], half_cos));
        }
    }

    let mut pw = Vec::with_capacity(counts[0] * counts[1]);
    for &r in &radii {
        for &(d, w) in &ang {
            pw.push([r * d[0], r * d[1], 0.0, w]);
        }
    }
    let patch = NurbsPatch::from_homogeneous(2, counts, pw)?;
    Ok((space, patch))
}

/// Quarter annulus map for arbitrary-degree spaces by Greville collocation.
/// Geometry is approximated to the same order as the space, which preserves
/// optimal convergence rates.
pub fn quarter_annulus_interpolated(space: &TensorSpace) -> Result<NurbsPatch, GeometryError> {
    NurbsPatch::interpolate(space, |xi| {
        let r = 1.0 + xi[0];
        let th = std::f64::consts::FRAC_PI_2 * xi[1];
        [r * th.cos(), r * th.sin(), 0.0]
    })
}
