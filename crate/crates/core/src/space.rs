//! Tensor-product function spaces.
//!
//! A `TensorSpace` combines one knot vector per parametric dimension with a
//! dof-per-node count. Periodic axes are built by unclamping an open knot
//! vector for a chosen seam continuity `k`, which identifies the last `k + 1`
//! basis functions with the first `k + 1`; global numbering always refers to
//! the reduced (unique) function count. The module also provides element
//! traversal, tensor-product Gauss-Legendre quadrature and the tensor-product
//! adjacency stencil used for sparse preallocation.

use thiserror::Error;

use crate::splines::{basis_stencil, BasisTable, KnotVector, SplineError};

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("axis {axis}: {source}")]
    Axis {
        axis: usize,
        #[source]
        source: SplineError,
    },
    #[error("space dimension must be 1-3, got {got}")]
    Dimension { got: usize },
    #[error("axis {axis}: element count must be positive")]
    NoElements { axis: usize },
    #[error("axis {axis}: degree must be at least 1")]
    ZeroDegree { axis: usize },
    #[error("axis {axis}: interval [{a}, {b}] is empty")]
    EmptyInterval { axis: usize, a: f64, b: f64 },
    #[error("dof_per_node must be positive")]
    ZeroDofPerNode,
    #[error("node index {index:?} outside unique counts {counts:?}")]
    NodeOutOfRange { index: [usize; 3], counts: [usize; 3] },
    #[error("component {comp} outside dof_per_node {dof_per_node}")]
    ComponentOutOfRange { comp: usize, dof_per_node: usize },
    #[error("element ordinal {index:?} outside element counts {counts:?}")]
    ElementOutOfRange { index: [usize; 3], counts: [usize; 3] },
}

/// Construction request for one parametric axis.
#[derive(Clone, Copy, Debug)]
pub struct AxisSpec {
    pub elements: usize,
    pub degree: usize,
    pub continuity: usize,
    pub interval: (f64, f64),
    /// Seam continuity order for a periodic axis.
    pub periodic: Option<usize>,
}

impl AxisSpec {
    pub fn open(elements: usize, degree: usize, continuity: usize) -> Self {
        AxisSpec { elements, degree, continuity, interval: (0.0, 1.0), periodic: None }
    }

    pub fn periodic(elements: usize, degree: usize, continuity: usize, k: usize) -> Self {
        AxisSpec { elements, degree, continuity, interval: (0.0, 1.0), periodic: Some(k) }
    }

    pub fn on(mut self, a: f64, b: f64) -> Self {
        self.interval = (a, b);
        self
    }
}

/// One parametric axis of a tensor space: its (possibly unclamped) knot
/// vector plus derived numbering tables.
#[derive(Clone, Debug)]
pub struct Axis {
    kv: KnotVector,
    periodic: Option<usize>,
    spans: Vec<usize>,
    unique_count: usize,
    /// Sorted adjacency stencil per unique function index.
    stencils: Vec<Vec<usize>>,
    /// Element ordinals supporting each unique function index.
    supports: Vec<Vec<usize>>,
}

impl Axis {
    fn new(kv: KnotVector, periodic: Option<usize>) -> Result<Self, SpaceError> {
        let clamped = kv.basis_count();
        let unique = match periodic {
            Some(k) => clamped - (k + 1),
            None => clamped,
        };
        let spans = kv.element_spans();
        let mut axis = Axis {
            kv,
            periodic,
            spans,
            unique_count: unique,
            stencils: Vec::new(),
            supports: Vec::new(),
        };
        axis.build_tables()?;
        Ok(axis)
    }

    fn build_tables(&mut self) -> Result<(), SpaceError> {
        let p = self.kv.degree();
        let clamped = self.kv.basis_count();
        let mut stencils: Vec<std::collections::BTreeSet<usize>> =
            vec![Default::default(); self.unique_count];
        for i in 0..clamped {
            let s = basis_stencil(i, &self.kv).map_err(|source| SpaceError::Axis {
                axis: usize::MAX,
                source,
            })?;
            let u = self.wrap(i as isize);
            for j in s.iter() {
                stencils[u].insert(self.wrap(j));
            }
        }
        self.stencils = stencils.into_iter().map(|s| s.into_iter().collect()).collect();

        let mut supports: Vec<Vec<usize>> = vec![Vec::new(); self.unique_count];
        for (e, &span) in self.spans.iter().enumerate() {
            for a in 0..=p {
                let u = self.wrap((span - p + a) as isize);
                if supports[u].last() != Some(&e) {
                    supports[u].push(e);
                }
            }
        }
        self.supports = supports;
        Ok(())
    }

    pub fn knot_vector(&self) -> &KnotVector {
        &self.kv
    }

    pub fn degree(&self) -> usize {
        self.kv.degree()
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic.is_some()
    }

    pub fn periodic_continuity(&self) -> Option<usize> {
        self.periodic
    }

    /// Basis count of the underlying (clamped-size) knot vector.
    pub fn clamped_count(&self) -> usize {
        self.kv.basis_count()
    }

    /// Independent function count after periodic identification.
    pub fn unique_count(&self) -> usize {
        self.unique_count
    }

    pub fn element_count(&self) -> usize {
        self.spans.len()
    }

    pub fn span_of_element(&self, e: usize) -> usize {
        self.spans[e]
    }

    pub fn period(&self) -> f64 {
        let (a, b) = self.kv.domain();
        b - a
    }

    /// Map a (possibly out-of-range) basis index to its unique id.
    #[inline]
    pub fn wrap(&self, i: isize) -> usize {
        if self.periodic.is_some() {
            i.rem_euclid(self.unique_count as isize) as usize
        } else {
            debug_assert!(i >= 0 && (i as usize) < self.unique_count);
            i as usize
        }
    }

    /// Unique indices adjacent to unique index `u` on this axis.
    pub fn stencil(&self, u: usize) -> &[usize] {
        &self.stencils[u]
    }

    /// Element ordinals whose span lies in the support of unique index `u`.
    pub fn support_elements(&self, u: usize) -> &[usize] {
        &self.supports[u]
    }
}

/// Per-dimension ordinal of a non-empty knot span. Unused trailing entries
/// are zero for spaces of dimension below three.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ElementId(pub [usize; 3]);

/// Per-axis point-count bound of the tensor quadrature storage.
pub const MAX_QUAD_POINTS: usize = 8;

/// Tensor-product quadrature rule on one element, stored per axis in fixed
/// arrays so building a rule does not allocate.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    dim: usize,
    counts: [usize; 3],
    axis_points: [[f64; MAX_QUAD_POINTS]; 3],
    axis_weights: [[f64; MAX_QUAD_POINTS]; 3],
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.counts[..self.dim].iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts[..self.dim]
    }

    pub fn axis_points(&self, d: usize) -> &[f64] {
        &self.axis_points[d][..self.counts[d]]
    }

    /// Multi-index of flattened point `q`, last axis fastest.
    pub fn multi(&self, q: usize) -> [usize; 3] {
        let mut m = [0usize; 3];
        let mut rest = q;
        for d in (0..self.dim).rev() {
            m[d] = rest % self.counts[d];
            rest /= self.counts[d];
        }
        m
    }

    pub fn point(&self, q: usize) -> [f64; 3] {
        let m = self.multi(q);
        let mut x = [0.0; 3];
        for d in 0..self.dim {
            x[d] = self.axis_points[d][m[d]];
        }
        x
    }

    pub fn weight(&self, q: usize) -> f64 {
        let m = self.multi(q);
        let mut w = 1.0;
        for d in 0..self.dim {
            w *= self.axis_weights[d][m[d]];
        }
        w
    }

    pub fn points(&self) -> Vec<[f64; 3]> {
        (0..self.len()).map(|q| self.point(q)).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|q| self.weight(q)).collect()
    }
}

/// Tensor-product B-spline values and parametric derivatives for the local
/// functions of one element at one point. Same layout as
/// [`crate::nurbs::RationalTable`].
#[derive(Clone, Debug, Default)]
pub struct TensorBasis {
    pub dim: usize,
    pub count: usize,
    pub nderiv: usize,
    pub values: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub d3: Vec<f64>,
}

impl TensorBasis {
    /// Combine per-axis basis tables into the tensor-product table.
    pub fn combine(tables: &[&BasisTable], nderiv: usize) -> TensorBasis {
        let mut out = TensorBasis::default();
        out.combine_into(tables, nderiv);
        out
    }

    pub fn combine_into(&mut self, tables: &[&BasisTable], nderiv: usize) {
        let dim = tables.len();
        let counts: Vec<usize> = tables.iter().map(|t| t.values.len()).collect();
        let total: usize = counts.iter().product();
        self.dim = dim;
        self.count = total;
        self.nderiv = nderiv;
        self.values.clear();
        self.values.resize(total, 0.0);
        self.d1.clear();
        self.d2.clear();
        self.d3.clear();
        if nderiv >= 1 {
            self.d1.resize(total * dim, 0.0);
        }
        if nderiv >= 2 {
            self.d2.resize(total * dim * dim, 0.0);
        }
        if nderiv >= 3 {
            self.d3.resize(total * dim * dim * dim, 0.0);
        }

        // orders[d] = derivative order taken on axis d.
        let component = |orders: &[usize; 3], multi: &[usize; 3]| -> f64 {
            let mut v = 1.0;
            for d in 0..dim {
                let t = tables[d];
                let a = multi[d];
                v *= match orders[d] {
                    0 => t.values[a],
                    o => t.derivs[o - 1][a],
                };
            }
            v
        };

        let mut multi = [0usize; 3];
        for l in 0..total {
            let mut rest = l;
            for d in (0..dim).rev() {
                multi[d] = rest % counts[d];
                rest /= counts[d];
            }
            self.values[l] = component(&[0, 0, 0], &multi);
            if nderiv >= 1 {
                for i in 0..dim {
                    let mut o = [0usize; 3];
                    o[i] += 1;
                    self.d1[l * dim + i] = component(&o, &multi);
                }
            }
            if nderiv >= 2 {
                for i in 0..dim {
                    for j in i..dim {
                        let mut o = [0usize; 3];
                        o[i] += 1;
                        o[j] += 1;
                        let v = component(&o, &multi);
                        self.d2[(l * dim + i) * dim + j] = v;
                        self.d2[(l * dim + j) * dim + i] = v;
                    }
                }
            }
            if nderiv >= 3 {
                for i in 0..dim {
                    for j in i..dim {
                        for k in j..dim {
                            let mut o = [0usize; 3];
                            o[i] += 1;
                            o[j] += 1;
                            o[k] += 1;
                            let v = component(&o, &multi);
                            for (a, b, c) in [
                                (i, j, k),
                                (i, k, j),
                                (j, i, k),
                                (j, k, i),
                                (k, i, j),
                                (k, j, i),
                            ] {
                                self.d3[((l * dim + a) * dim + b) * dim + c] = v;
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Tensor-product function space over 1-3 parametric dimensions.
#[derive(Clone, Debug)]
pub struct TensorSpace {
    axes: Vec<Axis>,
    dof_per_node: usize,
}

impl TensorSpace {
    /// Build from per-axis element/degree/continuity requests. Periodic axes
    /// are constructed open and then unclamped for the requested seam
    /// continuity.
    pub fn build(specs: &[AxisSpec], dof_per_node: usize) -> Result<Self, SpaceError> {
        if specs.is_empty() || specs.len() > 3 {
            return Err(SpaceError::Dimension { got: specs.len() });
        }
        if dof_per_node == 0 {
            return Err(SpaceError::ZeroDofPerNode);
        }
        let mut axes = Vec::with_capacity(specs.len());
        for (d, s) in specs.iter().enumerate() {
            if s.elements == 0 {
                return Err(SpaceError::NoElements { axis: d });
            }
            if s.degree == 0 {
                return Err(SpaceError::ZeroDegree { axis: d });
            }
            let (a, b) = s.interval;
            if !(b > a) {
                return Err(SpaceError::EmptyInterval { axis: d, a, b });
            }
            let open = KnotVector::open_uniform(s.elements, s.degree, s.continuity, a, b)
                .map_err(|source| SpaceError::Axis { axis: d, source })?;
            let kv = match s.periodic {
                Some(k) => open.unclamp(k).map_err(|source| SpaceError::Axis { axis: d, source })?,
                None => open,
            };
            axes.push(Axis::new(kv, s.periodic).map_err(|e| fix_axis(e, d))?);
        }
        Ok(TensorSpace { axes, dof_per_node })
    }

    /// Build from explicit knot vectors, the escape hatch for non-uniform
    /// continuity layouts. Periodic entries must already be unclamped.
    pub fn from_knot_vectors(
        axes: Vec<(KnotVector, Option<usize>)>,
        dof_per_node: usize,
    ) -> Result<Self, SpaceError> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(SpaceError::Dimension { got: axes.len() });
        }
        if dof_per_node == 0 {
            return Err(SpaceError::ZeroDofPerNode);
        }
        let axes = axes
            .into_iter()
            .enumerate()
            .map(|(d, (kv, periodic))| Axis::new(kv, periodic).map_err(|e| fix_axis(e, d)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TensorSpace { axes, dof_per_node })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn dof_per_node(&self) -> usize {
        self.dof_per_node
    }

    pub fn axis(&self, d: usize) -> &Axis {
        &self.axes[d]
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    /// Unique basis-function counts per axis, padded with 1.
    pub fn node_counts(&self) -> [usize; 3] {
        let mut c = [1usize; 3];
        for (d, a) in self.axes.iter().enumerate() {
            c[d] = a.unique_count();
        }
        c
    }

    /// Clamped basis-function counts per axis, padded with 1. Geometry
    /// coefficient grids use these extents.
    pub fn clamped_counts(&self) -> [usize; 3] {
        let mut c = [1usize; 3];
        for (d, a) in self.axes.iter().enumerate() {
            c[d] = a.clamped_count();
        }
        c
    }

    pub fn node_count(&self) -> usize {
        self.axes.iter().map(|a| a.unique_count()).product()
    }

    pub fn dof_count(&self) -> usize {
        self.node_count() * self.dof_per_node
    }

    /// Local functions per element.
    pub fn local_node_count(&self) -> usize {
        self.axes.iter().map(|a| a.degree() + 1).product()
    }

    pub fn element_counts(&self) -> [usize; 3] {
        let mut c = [1usize; 3];
        for (d, a) in self.axes.iter().enumerate() {
            c[d] = a.element_count();
        }
        c
    }

    pub fn element_count(&self) -> usize {
        self.axes.iter().map(|a| a.element_count()).product()
    }

    /// All elements in lexicographic order, last dimension fastest.
    pub fn elements(&self) -> Vec<ElementId> {
        let counts = self.element_counts();
        let total = self.element_count();
        (0..total)
            .map(|f| {
                let mut m = [0usize; 3];
                let mut rest = f;
                for d in (0..self.dim()).rev() {
                    m[d] = rest % counts[d];
                    rest /= counts[d];
                }
                ElementId(m)
            })
            .collect()
    }

    pub fn element_flat_index(&self, e: ElementId) -> usize {
        let counts = self.element_counts();
        let mut f = 0;
        for d in 0..self.dim() {
            f = f * counts[d] + e.0[d];
        }
        f
    }

    fn check_element(&self, e: ElementId) -> Result<(), SpaceError> {
        let counts = self.element_counts();
        for d in 0..self.dim() {
            if e.0[d] >= counts[d] {
                return Err(SpaceError::ElementOutOfRange { index: e.0, counts });
            }
        }
        Ok(())
    }

    /// Parametric bounding box of an element.
    pub fn element_interval(&self, e: ElementId) -> ([f64; 3], [f64; 3]) {
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for d in 0..self.dim() {
            let axis = &self.axes[d];
            let s = axis.span_of_element(e.0[d]);
            lo[d] = axis.knot_vector().knots()[s];
            hi[d] = axis.knot_vector().knots()[s + 1];
        }
        (lo, hi)
    }

    /// Gauss-Legendre rule with `degree + 1` points per dimension.
    pub fn quadrature_rule(&self, e: ElementId) -> Result<QuadratureRule, SpaceError> {
        let orders: Vec<usize> = self.axes.iter().map(|a| a.degree() + 1).collect();
        self.quadrature_rule_with(e, &orders)
    }

    /// Gauss-Legendre rule with explicit point counts per dimension (at most
    /// [`MAX_QUAD_POINTS`] each).
    pub fn quadrature_rule_with(
        &self,
        e: ElementId,
        orders: &[usize],
    ) -> Result<QuadratureRule, SpaceError> {
        self.check_element(e)?;
        let mut counts = [1usize; 3];
        let mut axis_points = [[0.0f64; MAX_QUAD_POINTS]; 3];
        let mut axis_weights = [[0.0f64; MAX_QUAD_POINTS]; 3];
        for d in 0..self.dim() {
            assert!(
                orders[d] >= 1 && orders[d] <= MAX_QUAD_POINTS,
                "quadrature order {} outside 1..={MAX_QUAD_POINTS}",
                orders[d]
            );
            let axis = &self.axes[d];
            let s = axis.span_of_element(e.0[d]);
            let (a, b) = (axis.knot_vector().knots()[s], axis.knot_vector().knots()[s + 1]);
            let (nodes, weights) = gauss_legendre(orders[d]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            counts[d] = orders[d];
            for (q, (t, w)) in nodes.iter().zip(&weights).enumerate() {
                axis_points[d][q] = mid + half * t;
                axis_weights[d][q] = w * half;
            }
        }
        Ok(QuadratureRule { dim: self.dim(), counts, axis_points, axis_weights })
    }

    /// Global node index from per-axis unique indices, last axis fastest.
    pub fn node_index(&self, node: [usize; 3]) -> Result<usize, SpaceError> {
        let counts = self.node_counts();
        for d in 0..self.dim() {
            if node[d] >= counts[d] {
                return Err(SpaceError::NodeOutOfRange { index: node, counts });
            }
        }
        let mut f = 0;
        for d in 0..self.dim() {
            f = f * counts[d] + node[d];
        }
        Ok(f)
    }

    /// Flat dof index: component varies fastest. Per-axis indices may be
    /// given pre-wrap on periodic axes.
    pub fn global_index(&self, node: [isize; 3], comp: usize) -> Result<usize, SpaceError> {
        if comp >= self.dof_per_node {
            return Err(SpaceError::ComponentOutOfRange { comp, dof_per_node: self.dof_per_node });
        }
        let mut wrapped = [0usize; 3];
        for d in 0..self.dim() {
            let axis = &self.axes[d];
            if axis.is_periodic() {
                wrapped[d] = axis.wrap(node[d]);
            } else {
                if node[d] < 0 || node[d] as usize >= axis.unique_count() {
                    return Err(SpaceError::NodeOutOfRange {
                        index: wrapped,
                        counts: self.node_counts(),
                    });
                }
                wrapped[d] = node[d] as usize;
            }
        }
        Ok(self.node_index(wrapped)? * self.dof_per_node + comp)
    }

    /// Adjacent global node indices of a node: the Cartesian product of the
    /// per-axis adjacency stencils, wrapped on periodic axes. Sorted.
    pub fn tensor_stencil(&self, node: [usize; 3]) -> Result<Vec<usize>, SpaceError> {
        let counts = self.node_counts();
        for d in 0..self.dim() {
            if node[d] >= counts[d] {
                return Err(SpaceError::NodeOutOfRange { index: node, counts });
            }
        }
        let per_axis: Vec<&[usize]> =
            (0..self.dim()).map(|d| self.axes[d].stencil(node[d])).collect();
        let mut out = Vec::with_capacity(per_axis.iter().map(|s| s.len()).product());
        let mut idx = [0usize; 3];
        loop {
            let mut m = [0usize; 3];
            for d in 0..self.dim() {
                m[d] = per_axis[d][idx[d]];
            }
            out.push(self.node_index(m)?);
            // Advance the odometer, last axis fastest.
            let mut d = self.dim();
            loop {
                if d == 0 {
                    out.sort_unstable();
                    out.dedup();
                    return Ok(out);
                }
                d -= 1;
                idx[d] += 1;
                if idx[d] < per_axis[d].len() {
                    break;
                }
                idx[d] = 0;
            }
        }
    }

    /// Clamped node multi-indices of the local functions on an element, in
    /// local order (last axis fastest).
    pub fn element_nodes(&self, e: ElementId) -> Vec<[usize; 3]> {
        let mut out = Vec::new();
        self.element_nodes_into(e, &mut out);
        out
    }

    pub fn element_nodes_into(&self, e: ElementId, out: &mut Vec<[usize; 3]>) {
        let dim = self.dim();
        let mut counts = [1usize; 3];
        let mut starts = [0usize; 3];
        for d in 0..dim {
            counts[d] = self.axes[d].degree() + 1;
            starts[d] = self.axes[d].span_of_element(e.0[d]) - self.axes[d].degree();
        }
        let total: usize = counts[..dim].iter().product();
        out.clear();
        out.reserve(total);
        for l in 0..total {
            let mut m = [0usize; 3];
            let mut rest = l;
            for d in (0..dim).rev() {
                m[d] = starts[d] + rest % counts[d];
                rest /= counts[d];
            }
            out.push(m);
        }
    }

    /// Global dof indices of the local functions on an element, component
    /// fastest within each node.
    pub fn element_dofs(&self, e: ElementId) -> Vec<usize> {
        let mut out = Vec::new();
        let mut nodes = Vec::new();
        self.element_nodes_into(e, &mut nodes);
        self.node_dofs_into(&nodes, &mut out);
        out
    }

    /// Dof indices of clamped nodes (wrapped on periodic axes), appended in
    /// node order with the component fastest.
    pub fn node_dofs_into(&self, nodes: &[[usize; 3]], out: &mut Vec<usize>) {
        out.clear();
        out.reserve(nodes.len() * self.dof_per_node);
        for n in nodes {
            let mut wrapped = [0usize; 3];
            for d in 0..self.dim() {
                wrapped[d] = self.axes[d].wrap(n[d] as isize);
            }
            let base = self.node_index(wrapped).expect("element node in range") * self.dof_per_node;
            for c in 0..self.dof_per_node {
                out.push(base + c);
            }
        }
    }

    /// Parametric Greville point of a clamped node multi-index.
    pub fn greville_point(&self, node: [usize; 3]) -> [f64; 3] {
        let mut x = [0.0; 3];
        for d in 0..self.dim() {
            x[d] = self.axes[d].knot_vector().greville(node[d]);
        }
        x
    }

    /// Unique node multi-indices on the boundary face of a non-periodic axis.
    /// `high = false` selects the low end.
    pub fn boundary_nodes(&self, axis: usize, high: bool) -> Vec<[usize; 3]> {
        assert!(!self.axes[axis].is_periodic(), "periodic axes have no boundary");
        let counts = self.node_counts();
        let fixed = if high { counts[axis] - 1 } else { 0 };
        let mut out = Vec::new();
        let dim = self.dim();
        let mut idx = [0usize; 3];
        loop {
            let mut node = idx;
            node[axis] = fixed;
            out.push(node);
            let mut d = dim;
            loop {
                if d == 0 {
                    out.sort_unstable();
                    out.dedup();
                    return out;
                }
                d -= 1;
                if d == axis {
                    continue;
                }
                idx[d] += 1;
                if idx[d] < counts[d] {
                    break;
                }
                idx[d] = 0;
            }
        }
    }
}

fn fix_axis(e: SpaceError, axis: usize) -> SpaceError {
    match e {
        SpaceError::Axis { source, .. } => SpaceError::Axis { axis, source },
        other => other,
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1]. Closed forms up to five
/// points, Newton iteration on the Legendre recurrence beyond.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature needs at least one point");
    match n {
        1 => (vec![0.0], vec![2.0]),
        2 => {
            let x = 1.0 / 3.0f64.sqrt();
            (vec![-x, x], vec![1.0, 1.0])
        }
        3 => {
            let x = (3.0f64 / 5.0).sqrt();
            (vec![-x, 0.0, x], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        4 => {
            let a = (3.0f64 / 7.0 - 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
            let b = (3.0f64 / 7.0 + 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
            let wa = (18.0 + 30.0f64.sqrt()) / 36.0;
            let wb = (18.0 - 30.0f64.sqrt()) / 36.0;
            (vec![-b, -a, a, b], vec![wb, wa, wa, wb])
        }
        5 => {
            let a = (5.0f64 - 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
            let b = (5.0f64 + 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
            let wa = (322.0 + 13.0 * 70.0f64.sqrt()) / 900.0;
            let wb = (322.0 - 13.0 * 70.0f64.sqrt()) / 900.0;
            (vec![-b, -a, 0.0, a, b], vec![wb, wa, 128.0 / 225.0, wa, wb])
        }
        _ => {
            let mut nodes = vec![0.0; n];
            let mut weights = vec![0.0; n];
            for i in 0..n {
                let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
                for _ in 0..100 {
                    let (p, dp) = legendre(n, x);
                    let dx = p / dp;
                    x -= dx;
                    if dx.abs() < 1e-15 {
                        break;
                    }
                }
                let (_, dp) = legendre(n, x);
                nodes[n - 1 - i] = x;
                weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
            }
            (nodes, weights)
        }
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
