//! Dense direct solver used to cross-check the iterative results.
//!
//! Gaussian elimination with partial pivoting. Intended for desk-scale
//! problems only.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::sparse::{CooMatrix, CsrMatrix};

/// Largest `rows * cols` accepted by [`dense_from_sparse`].
pub const MAX_DENSE_ENTRIES: usize = 1_000_000;

/// Pivots smaller than this fraction of the original row scale are treated as zero.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e-13;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            values: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_row_major(n_rows: usize, n_cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_rows * n_cols {
            return Err(Error::DimensionMismatch {
                expected: n_rows * n_cols,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { n_rows, n_cols, values })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.values[row * self.n_cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.n_cols..(row + 1) * self.n_cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0.0).count()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_cols {
            return Err(Error::DimensionMismatch {
                expected: self.n_cols,
                found: x.len(),
            });
        }
        Ok((0..self.n_rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Drops zeros and returns the compressed form.
    pub fn to_sparse(&self) -> CsrMatrix {
        let mut coo = CooMatrix::new(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            for (j, &v) in self.row(i).iter().enumerate() {
                if v != 0.0 {
                    coo.push(i, j, v).expect("index within bounds");
                }
            }
        }
        CsrMatrix::from_coo(&coo)
    }
}

pub fn dense_from_sparse(a: &CsrMatrix) -> Result<DenseMatrix> {
    let size = a.n_rows().saturating_mul(a.n_cols());
    if size > MAX_DENSE_ENTRIES {
        return Err(Error::TooLarge {
            size,
            limit: MAX_DENSE_ENTRIES,
        });
    }
    let mut m = DenseMatrix::zeros(a.n_rows(), a.n_cols());
    for (i, j, v) in a.iter() {
        m.set(i, j, v);
    }
    Ok(m)
}

/// Solves `Ax = b` by Gaussian elimination with partial pivoting.
///
/// Fails with [`Error::SingularMatrix`] when the best available pivot is
/// below [`SINGULAR_PIVOT_RATIO`] times the largest magnitude in its original row.
pub fn dense_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.n_rows;
    if a.n_cols != n {
        return Err(Error::NotSquare { rows: n, cols: a.n_cols });
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut m = a.values.clone();
    let mut rhs = b.to_vec();
    let mut scale: Vec<f64> = (0..n)
        .map(|i| a.row(i).iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
        .collect();

    for k in 0..n {
        let (p, pivot_abs) = (k..n)
            .map(|i| (i, m[i * n + k].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if scale[p] == 0.0 || pivot_abs < SINGULAR_PIVOT_RATIO * scale[p] {
            return Err(Error::SingularMatrix { column: k });
        }
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            rhs.swap(k, p);
            scale.swap(k, p);
        }
        let pivot = m[k * n + k];
        for i in k + 1..n {
            let factor = m[i * n + k] / pivot;
            if factor == 0.0 {
                continue;
            }
            m[i * n + k] = 0.0;
            for j in k + 1..n {
                m[i * n + j] -= factor * m[k * n + j];
            }
            rhs[i] -= factor * rhs[k];
        }
    }

    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let tail: f64 = (i + 1..n).map(|j| m[i * n + j] * x[j]).sum();
        x[i] = (rhs[i] - tail) / m[i * n + i];
    }
    Ok(x)
}

/// Determinant via LU with partial pivoting. A zero pivot column yields 0.
pub fn determinant(a: &DenseMatrix) -> Result<f64> {
    let n = a.n_rows;
    if a.n_cols != n {
        return Err(Error::NotSquare { rows: n, cols: a.n_cols });
    }
    let mut m = a.values.clone();
    let mut det = 1.0;
    for k in 0..n {
        let (p, pivot_abs) = (k..n)
            .map(|i| (i, m[i * n + k].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_abs == 0.0 {
            return Ok(0.0);
        }
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            det = -det;
        }
        let pivot = m[k * n + k];
        det *= pivot;
        for i in k + 1..n {
            let factor = m[i * n + k] / pivot;
            for j in k + 1..n {
                m[i * n + j] -= factor * m[k * n + j];
            }
        }
    }
    Ok(det)
}
