//! Patch file format: JSON with the knot vectors, degrees and the control
//! net in homogeneous coordinates, rows of `(x w, y w, z w, w)`. Numbers
//! round-trip bitwise through the shortest-representation float encoding.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::NurbsPatch;
use crate::space::TensorSpace;
use crate::splines::KnotVector;

use super::DemoError;

#[derive(Serialize, Deserialize)]
struct PatchFile {
    dim: usize,
    degrees: Vec<usize>,
    knots: Vec<Vec<f64>>,
    points: Vec<f64>,
}

pub fn write_patch(
    path: &Path,
    space: &TensorSpace,
    patch: &NurbsPatch,
) -> Result<(), DemoError> {
    patch.validate_for(space)?;
    let dim = space.dim();
    let counts = space.clamped_counts();
    let total: usize = counts[..dim].iter().product();
    let mut points = Vec::with_capacity(total * 4);
    for row in patch.homogeneous() {
        points.extend_from_slice(row);
    }
    let file = PatchFile {
        dim,
        degrees: (0..dim).map(|d| space.axis(d).degree()).collect(),
        knots: (0..dim).map(|d| space.axis(d).knot_vector().knots().to_vec()).collect(),
        points,
    };
    let out = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(out), &file)
        .map_err(|e| DemoError::InvalidPatch { field: "write", detail: e.to_string() })?;
    Ok(())
}

/// Read a patch and rebuild its (non-periodic) isoparametric space with the
/// requested dof-per-node count.
pub fn read_patch(
    path: &Path,
    dof_per_node: usize,
) -> Result<(TensorSpace, NurbsPatch), DemoError> {
    let text = std::fs::read_to_string(path)?;
    let file: PatchFile = serde_json::from_str(&text).map_err(|e| DemoError::Parse {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        detail: e.to_string(),
    })?;

    if file.dim == 0 || file.dim > 3 {
        return Err(DemoError::InvalidPatch {
            field: "dim",
            detail: format!("dimension must be 1-3, got {}", file.dim),
        });
    }
    if file.degrees.len() != file.dim || file.knots.len() != file.dim {
        return Err(DemoError::InvalidPatch {
            field: "degrees/knots",
            detail: format!(
                "expected {} degree and knot entries, got {} and {}",
                file.dim,
                file.degrees.len(),
                file.knots.len()
            ),
        });
    }
    let mut axes = Vec::with_capacity(file.dim);
    for (d, (knots, &degree)) in file.knots.into_iter().zip(&file.degrees).enumerate() {
        let kv = KnotVector::new(knots, degree).map_err(|e| DemoError::InvalidPatch {
            field: "knots",
            detail: format!("axis {d}: {e}"),
        })?;
        axes.push((kv, None));
    }
    let space = TensorSpace::from_knot_vectors(axes, dof_per_node)?;
    let counts = space.clamped_counts();
    let total: usize = counts[..file.dim].iter().product();
    if file.points.len() != total * 4 {
        return Err(DemoError::InvalidPatch {
            field: "points",
            detail: format!(
                "expected {} homogeneous rows ({} numbers), got {}",
                total,
                total * 4,
                file.points.len()
            ),
        });
    }
    let pw: Vec<[f64; 4]> = file
        .points
        .chunks_exact(4)
        .map(|row| [row[0], row[1], row[2], row[3]])
        .collect();
    let patch = NurbsPatch::from_homogeneous(file.dim, counts, pw).map_err(|e| match e {
        crate::geometry::GeometryError::NonPositiveWeight { index, value } => {
            DemoError::InvalidPatch {
                field: "points",
                detail: format!("non-positive weight {value} at row {index}"),
            }
        }
        other => DemoError::Geometry(other),
    })?;
    Ok((space, patch))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::quarter_annulus;
    use crate::space::AxisSpec;

    #[test]
    fn round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("annulus.json");
        let (space, patch) = quarter_annulus(2, 3, 1).unwrap();
        write_patch(&path, &space, &patch).unwrap();
        let (space2, patch2) = read_patch(&path, 1).unwrap();
        for d in 0..2 {
            let a = space.axis(d).knot_vector().knots();
            let b = space2.axis(d).knot_vector().knots();
            assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(b) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        for (ra, rb) in patch.homogeneous().iter().zip(patch2.homogeneous()) {
            for c in 0..4 {
                assert_eq!(ra[c].to_bits(), rb[c].to_bits());
            }
        }
    }

    #[test]
    fn unit_square_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("square.json");
        let space = TensorSpace::build(
            &[AxisSpec::open(1, 1, 0), AxisSpec::open(1, 1, 0)],
            1,
        )
        .unwrap();
        let patch = NurbsPatch::greville_identity(&space);
        write_patch(&path, &space, &patch).unwrap();
        let (_, patch2) = read_patch(&path, 1).unwrap();
        assert_eq!(patch.homogeneous(), patch2.homogeneous());
    }

    #[test]
    fn malformed_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");

        std::fs::write(&path, "{ not json").unwrap();
        assert!(matches!(read_patch(&path, 1), Err(DemoError::Parse { .. })));

        // Non-monotone knot vector.
        std::fs::write(
            &path,
            r#"{"dim":1,"degrees":[1],"knots":[[0.0,1.0,0.5,2.0]],"points":[0,0,0,1,1,0,0,1]}"#,
        )
        .unwrap();
        let err = read_patch(&path, 1);
        match err {
            Err(DemoError::InvalidPatch { field: "knots", detail }) => {
                assert!(detail.contains("non-decreasing"), "{detail}");
            }
            other => panic!("expected invalid-patch error, got {other:?}"),
        }
    }
}
