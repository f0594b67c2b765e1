//! Legacy ASCII VTK structured-grid output: field values sampled on a
//! uniform parametric lattice and mapped through the patch geometry.

use std::io::Write;
use std::path::Path;

use crate::geometry::{evaluate_at, NurbsPatch};
use crate::space::TensorSpace;

use super::DemoError;

/// Write `field` (dof-indexed, component fastest) sampled at
/// `samples_per_axis` points per parametric direction.
pub fn write_vtk(
    space: &TensorSpace,
    patch: &NurbsPatch,
    field: &[f64],
    samples_per_axis: usize,
    name: &str,
    path: &Path,
) -> Result<(), DemoError> {
    if field.len() != space.dof_count() {
        return Err(DemoError::InvalidConfig(format!(
            "field length {} does not match dof count {}",
            field.len(),
            space.dof_count()
        )));
    }
    let s = samples_per_axis.max(2);
    let dim = space.dim();
    let dpn = space.dof_per_node();
    let mut dims = [1usize; 3];
    dims[..dim].iter_mut().for_each(|d| *d = s);
    let total = dims[0] * dims[1] * dims[2];

    let mut points = Vec::with_capacity(total);
    let mut values = Vec::with_capacity(total * dpn);
    // VTK structured order: the first axis varies fastest.
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let mut xi = [0.0f64; 3];
                for (d, idx) in [i, j, k].iter().enumerate().take(dim) {
                    let (lo, hi) = space.axis(d).knot_vector().domain();
                    xi[d] = lo + (hi - lo) * (*idx as f64) / ((s - 1) as f64);
                }
                let pe = evaluate_at(space, patch, xi, 1)?;
                points.push(pe.map.x);
                for c in 0..dpn {
                    let mut v = 0.0;
                    for (a, node) in pe.nodes.iter().enumerate() {
                        let mut wrapped = [0usize; 3];
                        for d in 0..dim {
                            wrapped[d] = space.axis(d).wrap(node[d] as isize);
                        }
                        let dof = space.node_index(wrapped)? * dpn + c;
                        v += field[dof] * pe.shapes.values[a];
                    }
                    values.push(v);
                }
            }
        }
    }

    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{name}")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET STRUCTURED_GRID")?;
    writeln!(w, "DIMENSIONS {} {} {}", dims[0], dims[1], dims[2])?;
    writeln!(w, "POINTS {total} double")?;
    for p in &points {
        writeln!(w, "{} {} {}", p[0], p[1], p[2])?;
    }
    writeln!(w, "POINT_DATA {total}")?;
    if dpn == 1 {
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for v in &values {
            writeln!(w, "{v}")?;
        }
    } else {
        writeln!(w, "VECTORS {name} double")?;
        for chunk in values.chunks(dpn) {
            let mut row = [0.0; 3];
            row[..dpn].copy_from_slice(chunk);
            writeln!(w, "{} {} {}", row[0], row[1], row[2])?;
        }
    }
    Ok(())
}
