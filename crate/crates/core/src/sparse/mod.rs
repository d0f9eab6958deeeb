//! Compressed sparse column matrices and a sparse LDLᵀ factorization for
//! symmetric quasi-definite systems.

mod ldl;
mod ordering;

use thiserror::Error;

pub use ldl::{ldl_factor, ldl_factor_with_perm, LdlFactorization, Ordering};
pub use ordering::minimum_degree;

#[derive(Debug, Error, PartialEq)]
pub enum SparseError {
    #[error("entry ({row}, {col}) outside a {rows}x{cols} matrix")]
    OutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("zero pivot at index {index} (|d| = {value:e})")]
    Singular { index: usize, value: f64 },
    #[error("invalid permutation")]
    Permutation,
}

/// CSC matrix. Row indices are strictly increasing within every column.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    rows: usize,
    cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CscMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            col_ptr: vec![0; cols + 1],
            row_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            rows: n,
            cols: n,
            col_ptr: (0..=n).collect(),
            row_idx: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    /// Assembles from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, entries: &[(usize, usize, f64)]) -> Result<Self, SparseError> {
        for &(r, c, _) in entries {
            if r >= rows || c >= cols {
                return Err(SparseError::OutOfRange {
                    row: r,
                    col: c,
                    rows,
                    cols,
                });
            }
        }
        let mut sorted: Vec<(usize, usize, f64)> = entries.to_vec();
        sorted.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
        let mut col_ptr = vec![0; cols + 1];
        let mut row_idx: Vec<usize> = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_idx.push(r);
                values.push(v);
                col_ptr[c + 1] += 1;
                last = Some((r, c));
            }
        }
        for c in 0..cols {
            col_ptr[c + 1] += col_ptr[c];
        }
        Ok(Self {
            rows,
            cols,
            col_ptr,
            row_idx,
            values,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.col_ptr[self.cols]
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_idx(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(row, value)` pairs of column `j`.
    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.col_ptr[j]..self.col_ptr[j + 1];
        self.row_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.cols)
            .flat_map(|j| self.column(j).map(move |(i, v)| (i, j, v)))
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let t: Vec<_> = self.triplets().into_iter().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.cols, self.rows, &t).expect("indices in range")
    }

    pub fn scaled(&self, k: f64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= k;
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.cols]; self.rows];
        for (i, j, v) in self.triplets() {
            d[i][j] += v;
        }
        d
    }

    /// `M x`.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>, SparseError> {
        if x.len() != self.cols {
            return Err(SparseError::Dimension {
                expected: self.cols,
                got: x.len(),
            });
        }
        let mut y = vec![0.0; self.rows];
        self.spmv_acc(x, 1.0, &mut y);
        Ok(y)
    }

    /// `Mᵀ x`.
    pub fn transpose_spmv(&self, x: &[f64]) -> Result<Vec<f64>, SparseError> {
        if x.len() != self.rows {
            return Err(SparseError::Dimension {
                expected: self.rows,
                got: x.len(),
            });
        }
        let mut y = vec![0.0; self.cols];
        self.transpose_spmv_acc(x, 1.0, &mut y);
        Ok(y)
    }

    /// `y += alpha * M x`, lengths unchecked beyond slice bounds.
    pub(crate) fn spmv_acc(&self, x: &[f64], alpha: f64, y: &mut [f64]) {
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                y[self.row_idx[p]] += alpha * self.values[p] * xj;
            }
        }
    }

    /// `y += alpha * Mᵀ x`.
    pub(crate) fn transpose_spmv_acc(&self, x: &[f64], alpha: f64, y: &mut [f64]) {
        for (j, yj) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                s += self.values[p] * x[self.row_idx[p]];
            }
            *yj += alpha * s;
        }
    }

    /// `M x` for a symmetric matrix stored as its upper triangle.
    pub fn sym_upper_spmv(&self, x: &[f64]) -> Result<Vec<f64>, SparseError> {
        if self.rows != self.cols {
            return Err(SparseError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if x.len() != self.cols {
            return Err(SparseError::Dimension {
                expected: self.cols,
                got: x.len(),
            });
        }
        let mut y = vec![0.0; self.rows];
        self.sym_upper_spmv_acc(x, &mut y);
        Ok(y)
    }

    pub(crate) fn sym_upper_spmv_acc(&self, x: &[f64], y: &mut [f64]) {
        for j in 0..self.cols {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                let i = self.row_idx[p];
                let v = self.values[p];
                if i < j {
                    y[i] += v * x[j];
                    y[j] += v * x[i];
                } else if i == j {
                    y[i] += v * x[j];
                }
            }
        }
    }

    /// Largest entry of `|M - Mᵀ|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut diff = self.triplets();
        diff.extend(self.triplets().into_iter().map(|(i, j, v)| (j, i, -v)));
        match Self::from_triplets(self.rows.max(self.cols), self.rows.max(self.cols), &diff) {
            Ok(d) => d.values.iter().fold(0.0, |m, v| m.max(v.abs())),
            Err(_) => f64::INFINITY,
        }
    }

    /// Upper triangle (including the diagonal) as a new matrix.
    pub fn upper_triangle(&self) -> Self {
        let t: Vec<_> = self.triplets().into_iter().filter(|e| e.0 <= e.1).collect();
        Self::from_triplets(self.rows, self.cols, &t).expect("indices in range")
    }
}
