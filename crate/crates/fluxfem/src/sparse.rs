//! Triplet-assembled sparse matrices in compressed sparse row form.
//!
//! Assembly pushes `(row, col, value)` triplets in any order; `finalize`
//! sorts them, sums duplicates, drops exact zeros, and produces an
//! immutable CSR matrix. All downstream solvers consume the CSR form.

use crate::error::{Error, Result};

/// Triplet accumulator for building a [`SparseMatrix`].
#[derive(Debug, Clone)]
pub struct TripletBuilder {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            entries: Vec::new(),
        }
    }

    /// Adds `value` at `(row, col)`. Duplicates accumulate on `finalize`.
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.n_rows && col < self.n_cols);
        self.entries.push((row, col, value));
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Coalesces the triplets into CSR form: duplicates are summed and
    /// entries whose sum is exactly zero are dropped.
    pub fn finalize(mut self) -> SparseMatrix {
        self.entries
            .sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; self.n_rows + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut it = self.entries.into_iter().peekable();
        while let Some((r, c, mut v)) = it.next() {
            while let Some(&(r2, c2, v2)) = it.peek() {
                if r2 == r && c2 == c {
                    v += v2;
                    it.next();
                } else {
                    break;
                }
            }
            if v != 0.0 {
                row_ptr[r + 1] += 1;
                col_idx.push(c);
                values.push(v);
            }
        }
        for r in 0..self.n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }
}

/// Immutable CSR sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of one row, columns strictly increasing.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    /// Stored value at `(r, c)`, or 0 when the entry is structurally absent.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// Iterates all stored entries as `(row, col, value)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    /// y = A x.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_cols {
            return Err(Error::Dimension(format!(
                "mat-vec: matrix is {}x{}, vector has length {}",
                self.n_rows,
                self.n_cols,
                x.len()
            )));
        }
        let mut y = vec![0.0; self.n_rows];
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            let mut acc = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            y[r] = acc;
        }
        Ok(y)
    }

    /// y = A^T x.
    pub fn mul_transpose_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_rows {
            return Err(Error::Dimension(format!(
                "transpose mat-vec: matrix is {}x{}, vector has length {}",
                self.n_rows,
                self.n_cols,
                x.len()
            )));
        }
        let mut y = vec![0.0; self.n_cols];
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                y[c] += v * x[r];
            }
        }
        Ok(y)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest absolute stored entry (0 for an empty matrix).
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Euclidean norm of each column.
    pub fn column_norms(&self) -> Vec<f64> {
        let mut n = vec![0.0; self.n_cols];
        for (_, c, v) in self.entries() {
            n[c] += v * v;
        }
        n.iter_mut().for_each(|x| *x = x.sqrt());
        n
    }

    /// Dense copy, for the SVD cross-validation path.
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n_rows, self.n_cols);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
