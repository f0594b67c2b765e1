//! Compressed sparse row storage with a shared, immutable sparsity pattern.
//!
//! The pattern is fixed at preallocation time from the basis adjacency graph;
//! assembling values never allocates. Writing outside the pattern is a
//! programming error surfaced as `PatternViolation`.

use std::io::Write;
use std::sync::Arc;

use thiserror::Error;

use crate::exec::ExecPolicy;

#[derive(Debug, Error)]
pub enum SparseError {
    #[error("entry ({row}, {col}) is outside the preallocated pattern")]
    PatternViolation { row: usize, col: usize },
    #[error("dimension mismatch: matrix is {nrows} x {ncols}, vector has {len}")]
    DimensionMismatch { nrows: usize, ncols: usize, len: usize },
}

/// Row offsets and sorted column indices of a sparse matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparsityPattern {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
}

impl SparsityPattern {
    /// Build from per-row sorted column lists.
    pub fn from_rows(ncols: usize, rows: Vec<Vec<usize>>) -> Self {
        let nrows = rows.len();
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        for r in rows {
            debug_assert!(r.windows(2).all(|w| w[0] < w[1]), "columns must be sorted");
            cols.extend_from_slice(&r);
            row_ptr.push(cols.len());
        }
        SparsityPattern { nrows, ncols, row_ptr, cols }
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row_cols(&self, r: usize) -> &[usize] {
        &self.cols[self.row_ptr[r]..self.row_ptr[r + 1]]
    }

    /// Position of (row, col) in the value array.
    #[inline]
    pub fn find(&self, row: usize, col: usize) -> Option<usize> {
        let start = self.row_ptr[row];
        let cols = &self.cols[start..self.row_ptr[row + 1]];
        cols.binary_search(&col).ok().map(|p| start + p)
    }
}

/// CSR matrix over an `Arc`-shared pattern.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    pattern: Arc<SparsityPattern>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_pattern(pattern: Arc<SparsityPattern>) -> Self {
        let vals = vec![0.0; pattern.nnz()];
        CsrMatrix { pattern, vals }
    }

    /// Dense constructor for small systems and tests.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut pattern_rows = Vec::with_capacity(nrows);
        let mut vals = Vec::new();
        for r in rows {
            let mut cols = Vec::new();
            for (c, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    cols.push(c);
                    vals.push(v);
                }
            }
            pattern_rows.push(cols);
        }
        let pattern = Arc::new(SparsityPattern::from_rows(ncols, pattern_rows));
        CsrMatrix { pattern, vals }
    }

    pub fn nrows(&self) -> usize {
        self.pattern.nrows
    }

    pub fn ncols(&self) -> usize {
        self.pattern.ncols
    }

    pub fn nnz(&self) -> usize {
        self.pattern.nnz()
    }

    pub fn pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    pub fn values(&self) -> &[f64] {
        &self.vals
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.vals
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let range = self.pattern.row_ptr[r]..self.pattern.row_ptr[r + 1];
        (&self.pattern.cols[range.clone()], &self.vals[range])
    }

    pub fn set_zero(&mut self) {
        self.vals.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pattern.find(row, col).map_or(0.0, |p| self.vals[p])
    }

    pub fn add(&mut self, row: usize, col: usize, v: f64) -> Result<(), SparseError> {
        match self.pattern.find(row, col) {
            Some(p) => {
                self.vals[p] += v;
                Ok(())
            }
            None => Err(SparseError::PatternViolation { row, col }),
        }
    }

    pub fn set(&mut self, row: usize, col: usize, v: f64) -> Result<(), SparseError> {
        match self.pattern.find(row, col) {
            Some(p) => {
                self.vals[p] = v;
                Ok(())
            }
            None => Err(SparseError::PatternViolation { row, col }),
        }
    }

    /// y = A x, rows chunked across the execution policy when each worker
    /// gets enough nonzeros to amortize a parallel region.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64], exec: &ExecPolicy) {
        assert_eq!(x.len(), self.ncols());
        assert_eq!(y.len(), self.nrows());
        const PAR_NNZ_MIN: usize = 65_536;
        if exec.workers <= 1 || self.nnz() < PAR_NNZ_MIN * exec.workers {
            self.matvec_rows(x, y, 0..self.nrows());
            return;
        }
        let ranges = exec.chunk_ranges(self.nrows());
        if ranges.len() <= 1 {
            self.matvec_rows(x, y, 0..self.nrows());
            return;
        }
        let chunks = exec.run(ranges.len(), |w| {
            let r = ranges[w].clone();
            let mut out = vec![0.0; r.len()];
            for (slot, row) in out.iter_mut().zip(r.clone()) {
                *slot = self.row_dot(row, x);
            }
            out
        });
        let mut at = 0;
        for chunk in chunks {
            y[at..at + chunk.len()].copy_from_slice(&chunk);
            at += chunk.len();
        }
    }

    fn matvec_rows(&self, x: &[f64], y: &mut [f64], rows: std::ops::Range<usize>) {
        for row in rows {
            y[row] = self.row_dot(row, x);
        }
    }

    #[inline]
    fn row_dot(&self, row: usize, x: &[f64]) -> f64 {
        let (cols, vals) = self.row(row);
        cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum()
    }

    pub fn matvec(&self, x: &[f64], exec: &ExecPolicy) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows()];
        self.matvec_into(x, &mut y, exec);
        y
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols()]; self.nrows()];
        for r in 0..self.nrows() {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                out[r][c] = v;
            }
        }
        out
    }

    /// Matrix Market coordinate export (1-based indices).
    pub fn write_matrix_market(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.nrows(), self.ncols(), self.nnz())?;
        for r in 0..self.nrows() {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                writeln!(w, "{} {} {:e}", r + 1, c + 1, v)?;
            }
        }
        Ok(())
    }
}

/// Plain-text vector dump, one entry per line.
pub fn write_vector(values: &[f64], w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "{}", values.len())?;
    for v in values {
        writeln!(w, "{:e}", v)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_respects_pattern() {
        let pattern = Arc::new(SparsityPattern::from_rows(
            3,
            vec![vec![0, 1], vec![0, 1, 2], vec![2]],
        ));
        let mut m = CsrMatrix::from_pattern(pattern);
        m.add(0, 1, 2.5).unwrap();
        m.add(0, 1, 0.5).unwrap();
        assert_eq!(m.get(0, 1), 3.0);
        assert!(matches!(
            m.add(0, 2, 1.0),
            Err(SparseError::PatternViolation { row: 0, col: 2 })
        ));
    }

    #[test]
    fn matvec_matches_dense() {
        let dense = vec![
            vec![2.0, 0.0, 1.0],
            vec![0.0, 3.0, 0.0],
            vec![1.0, 0.0, 4.0],
        ];
        let m = CsrMatrix::from_dense(&dense);
        let x = vec![1.0, 2.0, 3.0];
        let y = m.matvec(&x, &ExecPolicy::sequential());
        assert_eq!(y, vec![5.0, 6.0, 13.0]);
        let y2 = m.matvec(&x, &ExecPolicy::parallel(3));
        assert_eq!(y, y2);
    }

    #[test]
    fn matrix_market_round_numbers() {
        let m = CsrMatrix::from_dense(&[vec![1.5, 0.0], vec![0.0, -2.0]]);
        let mut buf = Vec::new();
        m.write_matrix_market(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real general"));
        assert!(text.contains("1 1 1.5e0"));
        assert!(text.contains("2 2 -2e0"));
    }
}
