//! Partitioned Galerkin assembly.
//!
//! The single patch is partitioned by elements into a worker grid with
//! contiguous per-dimension blocks. Degree-of-freedom ownership follows the
//! left-most-element rule: a dof whose 1D support contains the first element
//! of some worker's block belongs to the last such worker, defaulting to the
//! worker containing the start of its support. Each worker assembles its own
//! elements, scatters entries on rows it owns into private storage and
//! everything else into a contribution cache; caches are merged after the
//! element loop in ascending worker rank and fixed element order, so results
//! are bitwise reproducible for a fixed worker count.

use std::sync::Arc;

use thiserror::Error;

use crate::exec::{split_ranges, ExecPolicy, Execution};
use crate::geometry::{
    inverse_map_higher, map_and_jacobian_into, push_forward_into, ElementGeometry, GeometryError,
    MapDerivatives, NurbsPatch, ShapeBundle,
};
use crate::nurbs::{eval_rational_into, NurbsError, RationalTable};
use crate::space::{ElementId, SpaceError, TensorBasis, TensorSpace};
use crate::sparse::{CsrMatrix, SparseError, SparsityPattern};
use crate::splines::SplineError;

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("{workers} workers exceed the {elements} available elements")]
    TooManyWorkers { workers: usize, elements: usize },
    #[error("cannot factor {workers} workers over element grid {counts:?}")]
    NoGridFactorization { workers: usize, counts: [usize; 3] },
    #[error("integrand produced a non-finite value on element {element:?}, point {point}")]
    NonFinite { element: [usize; 3], point: usize },
    #[error("conflicting boundary values {a} and {b} for dof {dof}")]
    ConflictingConstraint { dof: usize, a: f64, b: f64 },
    #[error("vector length {got} does not match dof count {expect}")]
    LengthMismatch { got: usize, expect: usize },
    #[error(transparent)]
    Sparse(#[from] SparseError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Nurbs(#[from] NurbsError),
    #[error(transparent)]
    Spline(#[from] SplineError),
}

impl AssemblyError {
    pub fn category(&self) -> i32 {
        match self {
            AssemblyError::TooManyWorkers { .. }
            | AssemblyError::NoGridFactorization { .. }
            | AssemblyError::LengthMismatch { .. }
            | AssemblyError::ConflictingConstraint { .. } => 2,
            _ => 3,
        }
    }
}

/// Element-block partition of a tensor space with dof ownership.
#[derive(Clone, Debug)]
pub struct Partition {
    exec: ExecPolicy,
    grid: [usize; 3],
    dof_count: usize,
    elements: Vec<Vec<ElementId>>,
    owned: Vec<Vec<usize>>,
    local: Vec<Vec<usize>>,
    owner: Vec<usize>,
}

/// Per-worker element and dof counts for imbalance inspection.
#[derive(Clone, Debug)]
pub struct LoadReport {
    pub elements: Vec<usize>,
    pub owned_dofs: Vec<usize>,
}

impl Partition {
    pub fn new(space: &TensorSpace, workers: usize) -> Result<Self, AssemblyError> {
        Self::with_execution(space, workers, Execution::Parallel)
    }

    pub fn with_execution(
        space: &TensorSpace,
        workers: usize,
        mode: Execution,
    ) -> Result<Self, AssemblyError> {
        let dim = space.dim();
        let counts = space.element_counts();
        let total_elements = space.element_count();
        if workers == 0 || workers > total_elements {
            return Err(AssemblyError::TooManyWorkers { workers, elements: total_elements });
        }
        let grid = factor_grid(workers, &counts, dim)
            .ok_or(AssemblyError::NoGridFactorization { workers, counts })?;

        let axis_blocks: Vec<Vec<std::ops::Range<usize>>> =
            (0..dim).map(|d| split_ranges(counts[d], grid[d])).collect();

        // Elements per worker, lexicographic order within each block.
        let mut elements = vec![Vec::new(); workers];
        for e in space.elements() {
            let mut g = [0usize; 3];
            for d in 0..dim {
                g[d] = axis_blocks[d]
                    .iter()
                    .position(|r| r.contains(&e.0[d]))
                    .expect("blocks cover all elements");
            }
            elements[flatten_grid(&g, &grid, dim)].push(e);
        }

        // Per-axis ownership of unique basis indices.
        let mut axis_owner: Vec<Vec<usize>> = Vec::with_capacity(dim);
        for d in 0..dim {
            let axis = space.axis(d);
            let blocks = &axis_blocks[d];
            let mut owners = Vec::with_capacity(axis.unique_count());
            for u in 0..axis.unique_count() {
                let support = axis.support_elements(u);
                let mut owner = blocks
                    .iter()
                    .position(|r| r.contains(&support[0]))
                    .expect("support element inside some block");
                for (g, r) in blocks.iter().enumerate() {
                    if support.binary_search(&r.start).is_ok() {
                        owner = owner.max(g);
                    }
                }
                owners.push(owner);
            }
            axis_owner.push(owners);
        }

        let dof_count = space.dof_count();
        let node_counts = space.node_counts();
        let dpn = space.dof_per_node();
        let mut owner = Vec::with_capacity(dof_count);
        let node_count = space.node_count();
        for node in 0..node_count {
            let mut rest = node;
            let mut g = [0usize; 3];
            for d in (0..dim).rev() {
                g[d] = axis_owner[d][rest % node_counts[d]];
                rest /= node_counts[d];
            }
            let w = flatten_grid(&g, &grid, dim);
            for _ in 0..dpn {
                owner.push(w);
            }
        }

        let mut owned = vec![Vec::new(); workers];
        for (dof, &w) in owner.iter().enumerate() {
            owned[w].push(dof);
        }

        let mut local = Vec::with_capacity(workers);
        for els in &elements {
            let mut dofs: Vec<usize> = els
                .iter()
                .flat_map(|&e| space.element_dofs(e))
                .collect();
            dofs.sort_unstable();
            dofs.dedup();
            local.push(dofs);
        }

        let mut g = [1usize; 3];
        g[..dim].copy_from_slice(&grid[..dim]);
        Ok(Partition {
            exec: ExecPolicy { workers, mode },
            grid: g,
            dof_count,
            elements,
            owned,
            local,
            owner,
        })
    }

    pub fn worker_count(&self) -> usize {
        self.exec.workers
    }

    pub fn exec(&self) -> ExecPolicy {
        self.exec
    }

    pub fn grid(&self) -> [usize; 3] {
        self.grid
    }

    pub fn elements(&self, w: usize) -> &[ElementId] {
        &self.elements[w]
    }

    pub fn owned(&self, w: usize) -> &[usize] {
        &self.owned[w]
    }

    pub fn local_dofs(&self, w: usize) -> &[usize] {
        &self.local[w]
    }

    pub fn owner_of(&self, dof: usize) -> usize {
        self.owner[dof]
    }

    pub fn dof_count(&self) -> usize {
        self.dof_count
    }

    pub fn load_report(&self) -> LoadReport {
        LoadReport {
            elements: self.elements.iter().map(Vec::len).collect(),
            owned_dofs: self.owned.iter().map(Vec::len).collect(),
        }
    }

    /// Ghosted view of a global vector for one worker: current values of
    /// every dof its elements touch.
    pub fn gather_local(&self, w: usize, values: &[f64]) -> LocalView {
        let dofs = self.local[w].clone();
        let values = dofs.iter().map(|&d| values[d]).collect();
        LocalView { dofs, values }
    }

    /// Local views for all workers.
    pub fn scatter_local(&self, values: &[f64]) -> Vec<LocalView> {
        (0..self.worker_count()).map(|w| self.gather_local(w, values)).collect()
    }
}

/// Factor `workers` into a per-dimension grid with factors bounded by the
/// element counts, minimizing the largest block extent. Ties prefer larger
/// factors on earlier (slower-varying) axes.
fn factor_grid(workers: usize, counts: &[usize; 3], dim: usize) -> Option<[usize; 3]> {
    let mut best: Option<([usize; 3], usize)> = None;
    let mut consider = |g: [usize; 3]| {
        for d in 0..dim {
            if g[d] == 0 || g[d] > counts[d] {
                return;
            }
        }
        let cost = (0..dim)
            .map(|d| counts[d].div_ceil(g[d]))
            .max()
            .unwrap_or(1);
        let better = match &best {
            None => true,
            Some((bg, bc)) => {
                cost < *bc || (cost == *bc && g[..dim] > bg[..dim])
            }
        };
        if better {
            best = Some((g, cost));
        }
    };
    match dim {
        1 => consider([workers, 1, 1]),
        2 => {
            for w0 in 1..=workers {
                if workers % w0 == 0 {
                    consider([w0, workers / w0, 1]);
                }
            }
        }
        _ => {
            for w0 in 1..=workers {
                if workers % w0 != 0 {
                    continue;
                }
                let rest = workers / w0;
                for w1 in 1..=rest {
                    if rest % w1 == 0 {
                        consider([w0, w1, rest / w1]);
                    }
                }
            }
        }
    }
    best.map(|(g, _)| g)
}

#[inline]
fn flatten_grid(g: &[usize; 3], grid: &[usize; 3], dim: usize) -> usize {
    let mut f = 0;
    for d in 0..dim {
        f = f * grid[d] + g[d];
    }
    f
}

/// Globally indexed coefficient vector.
#[derive(Clone, Debug)]
pub struct PartitionedVector {
    values: Vec<f64>,
}

impl PartitionedVector {
    pub fn zeros(n: usize) -> Self {
        PartitionedVector { values: vec![0.0; n] }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        PartitionedVector { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Owned slice values of one worker, in owned-dof order.
    pub fn owned_values(&self, part: &Partition, w: usize) -> Vec<f64> {
        part.owned(w).iter().map(|&d| self.values[d]).collect()
    }

    /// Ghosted view for one worker.
    pub fn local_view(&self, part: &Partition, w: usize) -> LocalView {
        part.gather_local(w, &self.values)
    }

    /// Ghosted views for every worker.
    pub fn scatter_local(&self, part: &Partition) -> Vec<LocalView> {
        part.scatter_local(&self.values)
    }
}

/// Owned-plus-ghost view of a vector for one worker.
#[derive(Clone, Debug)]
pub struct LocalView {
    pub dofs: Vec<usize>,
    pub values: Vec<f64>,
}

impl LocalView {
    #[inline]
    pub fn position(&self, dof: usize) -> Option<usize> {
        self.dofs.binary_search(&dof).ok()
    }

    #[inline]
    pub fn get(&self, dof: usize) -> f64 {
        self.values[self.position(dof).expect("dof inside local view")]
    }
}

/// Preallocate the sparse matrix pattern from the tensor-product adjacency
/// graph, expanded by dof-per-node blocks. Values start at zero.
pub fn preallocate(space: &TensorSpace) -> Result<CsrMatrix, AssemblyError> {
    let dpn = space.dof_per_node();
    let node_counts = space.node_counts();
    let dim = space.dim();
    let mut rows = Vec::with_capacity(space.dof_count());
    for node in 0..space.node_count() {
        let mut rest = node;
        let mut m = [0usize; 3];
        for d in (0..dim).rev() {
            m[d] = rest % node_counts[d];
            rest /= node_counts[d];
        }
        let stencil = space.tensor_stencil(m)?;
        let mut cols = Vec::with_capacity(stencil.len() * dpn);
        for &nbr in &stencil {
            for c in 0..dpn {
                cols.push(nbr * dpn + c);
            }
        }
        for _ in 0..dpn {
            rows.push(cols.clone());
        }
    }
    let pattern = Arc::new(SparsityPattern::from_rows(space.dof_count(), rows));
    Ok(CsrMatrix::from_pattern(pattern))
}

/// Everything an integrand sees at one quadrature point.
pub struct QPoint<'a> {
    pub element: ElementId,
    pub point_index: usize,
    pub xi: [f64; 3],
    pub x: [f64; 3],
    /// Quadrature weight in parametric coordinates.
    pub weight: f64,
    /// |det| of the geometric map.
    pub jacobian: f64,
    pub shapes: &'a ShapeBundle,
    pub map: &'a MapDerivatives,
    coeffs: &'a [Vec<f64>],
    dof_per_node: usize,
}

impl QPoint<'_> {
    pub fn dof_per_node(&self) -> usize {
        self.dof_per_node
    }

    /// Local coefficients of input vector `input`, component fastest.
    pub fn coeffs(&self, input: usize) -> &[f64] {
        &self.coeffs[input]
    }

    pub fn field_value(&self, input: usize, comp: usize) -> f64 {
        let c = &self.coeffs[input];
        let dpn = self.dof_per_node;
        self.shapes
            .values
            .iter()
            .enumerate()
            .map(|(a, v)| c[a * dpn + comp] * v)
            .sum()
    }

    pub fn field_grad(&self, input: usize, comp: usize) -> [f64; 3] {
        let c = &self.coeffs[input];
        let dpn = self.dof_per_node;
        let dim = self.shapes.dim;
        let mut g = [0.0; 3];
        for a in 0..self.shapes.count {
            let ca = c[a * dpn + comp];
            for i in 0..dim {
                g[i] += ca * self.shapes.grad[a * dim + i];
            }
        }
        g
    }

    pub fn field_laplacian(&self, input: usize, comp: usize) -> f64 {
        let c = &self.coeffs[input];
        let dpn = self.dof_per_node;
        (0..self.shapes.count)
            .map(|a| c[a * dpn + comp] * self.shapes.laplacian(a))
            .sum()
    }
}

struct Workspace {
    tensor: TensorBasis,
    rational: RationalTable,
    map: MapDerivatives,
    shapes: ShapeBundle,
    geo: ElementGeometry,
    coeffs: Vec<Vec<f64>>,
    nodes: Vec<[usize; 3]>,
    dofs: Vec<usize>,
}

impl Workspace {
    fn new(inputs: usize) -> Self {
        Workspace {
            tensor: TensorBasis::default(),
            rational: RationalTable::default(),
            map: MapDerivatives::default(),
            shapes: ShapeBundle::default(),
            geo: ElementGeometry::default(),
            coeffs: vec![Vec::new(); inputs],
            nodes: Vec::new(),
            dofs: Vec::new(),
        }
    }
}

/// Shared element loop: evaluates the shape pipeline at every quadrature
/// point of every element of worker `w` and hands control to `per_point`.
fn worker_elements<E>(
    space: &TensorSpace,
    part: &Partition,
    patch: &NurbsPatch,
    inputs: &[&[f64]],
    nderiv: usize,
    w: usize,
    mut per_point: E,
) -> Result<(), AssemblyError>
where
    E: FnMut(&QPoint, &[usize]) -> Result<(), AssemblyError>,
{
    let dim = space.dim();
    let dpn = space.dof_per_node();
    let views: Vec<LocalView> =
        inputs.iter().map(|v| part.gather_local(w, v)).collect();
    let mut ws = Workspace::new(inputs.len());
    let empty_table = || crate::splines::BasisTable {
        span: 0,
        values: Vec::new(),
        derivs: Vec::new(),
    };
    let mut axis_tables: [Vec<crate::splines::BasisTable>; 3] = Default::default();
    for (d, tables) in axis_tables.iter_mut().enumerate().take(dim) {
        tables.resize_with(space.axis(d).degree() + 1, empty_table);
    }

    for &e in part.elements(w) {
        space.element_nodes_into(e, &mut ws.nodes);
        space.node_dofs_into(&ws.nodes, &mut ws.dofs);
        patch.gather_into(&ws.nodes, &mut ws.geo);
        for (view, coeffs) in views.iter().zip(ws.coeffs.iter_mut()) {
            coeffs.clear();
            coeffs.extend(ws.dofs.iter().map(|&d| view.get(d)));
        }

        let rule = space.quadrature_rule(e)?;
        for d in 0..dim {
            if axis_tables[d].len() < rule.counts()[d] {
                axis_tables[d].resize_with(rule.counts()[d], empty_table);
            }
            for (q, &xi) in rule.axis_points(d).iter().enumerate() {
                space.axis(d).knot_vector().eval_into(xi, nderiv, &mut axis_tables[d][q])?;
            }
        }

        for q in 0..rule.len() {
            let multi = rule.multi(q);
            let t0 = &axis_tables[0][multi[0]];
            let mut tables: [&crate::splines::BasisTable; 3] = [t0; 3];
            for d in 1..dim {
                tables[d] = &axis_tables[d][multi[d]];
            }
            ws.tensor.combine_into(&tables[..dim], nderiv);
            eval_rational_into(&mut ws.rational, &ws.tensor, &ws.geo.weights, nderiv)?;
            map_and_jacobian_into(&mut ws.map, &ws.geo, &ws.rational)?;
            if nderiv >= 2 {
                inverse_map_higher(&mut ws.map)?;
            }
            push_forward_into(&mut ws.shapes, &ws.rational, &ws.map, nderiv)?;

            let qp = QPoint {
                element: e,
                point_index: q,
                xi: rule.point(q),
                x: ws.map.x,
                weight: rule.weight(q),
                jacobian: ws.map.det.abs(),
                shapes: &ws.shapes,
                map: &ws.map,
                coeffs: &ws.coeffs,
                dof_per_node: dpn,
            };
            per_point(&qp, &ws.dofs)?;
        }
    }
    Ok(())
}

/// Assemble a global vector. The integrand fills `out` (one entry per local
/// dof, component fastest) with the quadrature-point contribution `F_q`; the
/// driver applies the `J_q w_q` weighting and scatters into owned storage or
/// the contribution cache.
pub fn form_vector<F>(
    space: &TensorSpace,
    part: &Partition,
    patch: &NurbsPatch,
    inputs: &[&[f64]],
    nderiv: usize,
    integrand: F,
) -> Result<Vec<f64>, AssemblyError>
where
    F: Fn(&QPoint, &mut [f64]) + Sync + Send,
{
    patch.validate_for(space)?;
    check_inputs(space, inputs)?;
    let w_count = part.worker_count();
    let nloc = space.local_node_count() * space.dof_per_node();

    struct WorkerOut {
        owned: Vec<f64>,
        cache: Vec<(usize, f64)>,
    }

    let results: Vec<Result<WorkerOut, AssemblyError>> = part.exec().run(w_count, |w| {
        let mut owned = vec![0.0; part.owned(w).len()];
        let mut cache: Vec<(usize, f64)> = Vec::new();
        let mut fe = vec![0.0; nloc];
        let mut fq = vec![0.0; nloc];
        let mut current: Option<ElementId> = None;

        let flush = |fe: &mut Vec<f64>,
                     dofs: &[usize],
                     owned: &mut Vec<f64>,
                     cache: &mut Vec<(usize, f64)>| {
            for (l, &dof) in dofs.iter().enumerate() {
                let v = fe[l];
                if v == 0.0 {
                    continue;
                }
                if part.owner_of(dof) == w {
                    let pos = part.owned(w).binary_search(&dof).expect("owned dof");
                    owned[pos] += v;
                } else {
                    cache.push((dof, v));
                }
            }
            fe.iter_mut().for_each(|v| *v = 0.0);
        };

        let mut held_dofs: Vec<usize> = Vec::new();
        let run = worker_elements(space, part, patch, inputs, nderiv, w, |qp, dofs| {
            if current != Some(qp.element) {
                if current.is_some() {
                    flush(&mut fe, &held_dofs, &mut owned, &mut cache);
                }
                current = Some(qp.element);
                held_dofs.clear();
                held_dofs.extend_from_slice(dofs);
            }
            fq.iter_mut().for_each(|v| *v = 0.0);
            integrand(qp, &mut fq);
            let scale = qp.jacobian * qp.weight;
            for (l, &v) in fq.iter().enumerate() {
                if !v.is_finite() {
                    return Err(AssemblyError::NonFinite {
                        element: qp.element.0,
                        point: qp.point_index,
                    });
                }
                fe[l] += v * scale;
            }
            Ok(())
        });
        if let Err(e) = run {
            return Err(e);
        }
        if current.is_some() {
            flush(&mut fe, &held_dofs, &mut owned, &mut cache);
        }
        Ok(WorkerOut { owned, cache })
    });

    let mut global = vec![0.0; space.dof_count()];
    let mut outs = Vec::with_capacity(w_count);
    for r in results {
        outs.push(r?);
    }
    for (w, out) in outs.iter().enumerate() {
        for (pos, &dof) in part.owned(w).iter().enumerate() {
            global[dof] += out.owned[pos];
        }
    }
    for out in &outs {
        for &(dof, v) in &out.cache {
            global[dof] += v;
        }
    }
    Ok(global)
}

/// Assemble a global matrix into a fresh copy of `pattern`. The integrand
/// fills a row-major `(n_local x n_local)` block with the quadrature-point
/// contribution; the driver applies `J_q w_q`, scatters owned rows directly
/// and caches the rest.
pub fn form_matrix<F>(
    space: &TensorSpace,
    part: &Partition,
    patch: &NurbsPatch,
    inputs: &[&[f64]],
    nderiv: usize,
    pattern: &CsrMatrix,
    integrand: F,
) -> Result<CsrMatrix, AssemblyError>
where
    F: Fn(&QPoint, &mut [f64]) + Sync + Send,
{
    patch.validate_for(space)?;
    check_inputs(space, inputs)?;
    let w_count = part.worker_count();
    let nloc = space.local_node_count() * space.dof_per_node();
    let pat = pattern.pattern().clone();

    // Private value storage for each worker's owned rows.
    struct WorkerOut {
        owned_vals: Vec<f64>,
        cache: Vec<(usize, usize, f64)>,
    }
    let owned_offsets: Vec<Vec<usize>> = (0..w_count)
        .map(|w| {
            let mut off = Vec::with_capacity(part.owned(w).len() + 1);
            off.push(0);
            for &row in part.owned(w) {
                let nnz = pat.row_ptr[row + 1] - pat.row_ptr[row];
                off.push(off.last().unwrap() + nnz);
            }
            off
        })
        .collect();

    let results: Vec<Result<WorkerOut, AssemblyError>> = part.exec().run(w_count, |w| {
        let offsets = &owned_offsets[w];
        let mut owned_vals = vec![0.0; *offsets.last().unwrap()];
        let mut cache: Vec<(usize, usize, f64)> = Vec::new();
        let mut ke = vec![0.0; nloc * nloc];
        let mut kq = vec![0.0; nloc * nloc];
        let mut current: Option<ElementId> = None;
        let mut held_dofs: Vec<usize> = Vec::new();

        let flush = |ke: &mut Vec<f64>,
                     dofs: &[usize],
                     owned_vals: &mut Vec<f64>,
                     cache: &mut Vec<(usize, usize, f64)>|
         -> Result<(), AssemblyError> {
            for (la, &row) in dofs.iter().enumerate() {
                if part.owner_of(row) == w {
                    let pos = part.owned(w).binary_search(&row).expect("owned row");
                    let row_start = pat.row_ptr[row];
                    for (lb, &col) in dofs.iter().enumerate() {
                        let v = ke[la * dofs.len() + lb];
                        if v == 0.0 {
                            continue;
                        }
                        let slot = pat
                            .find(row, col)
                            .ok_or(SparseError::PatternViolation { row, col })?;
                        owned_vals[offsets[pos] + (slot - row_start)] += v;
                    }
                } else {
                    for (lb, &col) in dofs.iter().enumerate() {
                        let v = ke[la * dofs.len() + lb];
                        if v != 0.0 {
                            cache.push((row, col, v));
                        }
                    }
                }
            }
            ke.iter_mut().for_each(|v| *v = 0.0);
            Ok(())
        };

        let run = worker_elements(space, part, patch, inputs, nderiv, w, |qp, dofs| {
            if current != Some(qp.element) {
                if current.is_some() {
                    flush(&mut ke, &held_dofs, &mut owned_vals, &mut cache)?;
                }
                current = Some(qp.element);
                held_dofs.clear();
                held_dofs.extend_from_slice(dofs);
            }
            kq.iter_mut().for_each(|v| *v = 0.0);
            integrand(qp, &mut kq);
            let scale = qp.jacobian * qp.weight;
            for (slot, &v) in kq.iter().enumerate() {
                if !v.is_finite() {
                    return Err(AssemblyError::NonFinite {
                        element: qp.element.0,
                        point: qp.point_index,
                    });
                }
                ke[slot] += v * scale;
            }
            Ok(())
        });
        if let Err(e) = run {
            return Err(e);
        }
        if current.is_some() {
            flush(&mut ke, &held_dofs, &mut owned_vals, &mut cache)?;
        }
        Ok(WorkerOut { owned_vals, cache })
    });

    let mut matrix = CsrMatrix::from_pattern(pat.clone());
    let mut outs = Vec::with_capacity(w_count);
    for r in results {
        outs.push(r?);
    }
    for (w, out) in outs.iter().enumerate() {
        let offsets = &owned_offsets[w];
        for (pos, &row) in part.owned(w).iter().enumerate() {
            let row_start = pat.row_ptr[row];
            let nnz = pat.row_ptr[row + 1] - row_start;
            let src = &out.owned_vals[offsets[pos]..offsets[pos] + nnz];
            let dst = &mut matrix.values_mut()[row_start..row_start + nnz];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
    }
    for out in &outs {
        for &(row, col, v) in &out.cache {
            matrix.add(row, col, v)?;
        }
    }
    Ok(matrix)
}

/// Integrate a scalar quantity over the patch. Per-worker partial sums are
/// accumulated in element order and merged in rank order.
pub fn integrate<F>(
    space: &TensorSpace,
    part: &Partition,
    patch: &NurbsPatch,
    inputs: &[&[f64]],
    nderiv: usize,
    f: F,
) -> Result<f64, AssemblyError>
where
    F: Fn(&QPoint) -> f64 + Sync + Send,
{
    patch.validate_for(space)?;
    check_inputs(space, inputs)?;
    let results: Vec<Result<f64, AssemblyError>> =
        part.exec().run(part.worker_count(), |w| {
            let mut sum = 0.0;
            worker_elements(space, part, patch, inputs, nderiv, w, |qp, _| {
                sum += f(qp) * qp.jacobian * qp.weight;
                Ok(())
            })?;
            Ok(sum)
        });
    let mut total = 0.0;
    for r in results {
        total += r?;
    }
    Ok(total)
}

fn check_inputs(space: &TensorSpace, inputs: &[&[f64]]) -> Result<(), AssemblyError> {
    for v in inputs {
        if v.len() != space.dof_count() {
            return Err(AssemblyError::LengthMismatch {
                got: v.len(),
                expect: space.dof_count(),
            });
        }
    }
    Ok(())
}

/// Impose Dirichlet values by symmetric elimination: known values move to the
/// right-hand side, constrained rows and columns are zeroed, the diagonal is
/// set to one and the right-hand side entry to the prescribed value.
pub fn apply_dirichlet(
    matrix: &mut CsrMatrix,
    rhs: &mut [f64],
    bc: &[(usize, f64)],
) -> Result<(), AssemblyError> {
    let n = matrix.nrows();
    let mut value: Vec<Option<f64>> = vec![None; n];
    for &(dof, g) in bc {
        if let Some(prev) = value[dof] {
            if prev != g {
                return Err(AssemblyError::ConflictingConstraint { dof, a: prev, b: g });
            }
        }
        value[dof] = Some(g);
    }

    let pattern = matrix.pattern().clone();
    for row in 0..n {
        if value[row].is_some() {
            continue;
        }
        let start = pattern.row_ptr[row];
        let end = pattern.row_ptr[row + 1];
        for slot in start..end {
            let col = pattern.cols[slot];
            if let Some(g) = value[col] {
                rhs[row] -= matrix.values()[slot] * g;
                matrix.values_mut()[slot] = 0.0;
            }
        }
    }
    for row in 0..n {
        if let Some(g) = value[row] {
            let start = pattern.row_ptr[row];
            let end = pattern.row_ptr[row + 1];
            for slot in start..end {
                matrix.values_mut()[slot] = 0.0;
            }
            matrix.set(row, row, 1.0)?;
            rhs[row] = g;
        }
    }
    Ok(())
}
