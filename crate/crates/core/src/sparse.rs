//! Sparse linear systems solved as fixed points of `T(x) = x - Ax + b`.
//!
//! `T` is a contraction whenever some operator norm of the iteration matrix
//! `I - A` is below one. [`certify`] computes the infinity, one and Frobenius
//! norms of `I - A` straight from the compressed rows, never densifying, and
//! [`solve_fixed_point`] drives the iteration through
//! [`banach_iterate`](crate::metric::banach_iterate) in the Euclidean metric.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::metric::{banach_iterate, FixedPointMap, FixedPointResult, IterationTrace, StoppingRule};
use crate::oracle::{self, DenseMatrix};

/// Largest dimension for which [`determinant_diagnostic`] densifies.
pub const DETERMINANT_MAX_DIM: usize = 12;

/// Triplet storage. Duplicates and explicit zeros are allowed until
/// [`CooMatrix::canonicalize`] is called.
#[derive(Debug, Clone, PartialEq)]
pub struct CooMatrix {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl CooMatrix {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) -> Result<()> {
        if row >= self.n_rows || col >= self.n_cols {
            return Err(Error::IndexOutOfBounds {
                row,
                col,
                rows: self.n_rows,
                cols: self.n_cols,
            });
        }
        if !value.is_finite() {
            return Err(Error::NonFinite);
        }
        self.entries.push((row, col, value));
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Sorts row-major, sums duplicates and drops zeros.
    pub fn canonicalize(&mut self) {
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(self.entries.len());
        for &(r, c, v) in &self.entries {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|e| e.2 != 0.0);
        self.entries = merged;
    }

    pub fn canonicalized(mut self) -> Self {
        self.canonicalize();
        self
    }

    pub fn is_canonical(&self) -> bool {
        self.entries.iter().all(|e| e.2 != 0.0)
            && self
                .entries
                .windows(2)
                .all(|w| (w[0].0, w[0].1) < (w[1].0, w[1].1))
    }
}

/// Compressed sparse row storage with strictly increasing columns per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_coo(coo: &CooMatrix) -> Self {
        let coo = coo.clone().canonicalized();
        let mut row_offsets = vec![0usize; coo.n_rows + 1];
        for &(r, _, _) in &coo.entries {
            row_offsets[r + 1] += 1;
        }
        for i in 0..coo.n_rows {
            row_offsets[i + 1] += row_offsets[i];
        }
        Self {
            n_rows: coo.n_rows,
            n_cols: coo.n_cols,
            row_offsets,
            col_indices: coo.entries.iter().map(|e| e.1).collect(),
            values: coo.entries.iter().map(|e| e.2).collect(),
        }
    }

    /// Validates raw CSR arrays.
    pub fn try_from_parts(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != n_rows + 1 {
            return Err(Error::InvalidStructure("row_offsets must have n_rows + 1 entries"));
        }
        if row_offsets[0] != 0 || row_offsets[n_rows] != col_indices.len() {
            return Err(Error::InvalidStructure("row_offsets must start at 0 and end at nnz"));
        }
        if col_indices.len() != values.len() {
            return Err(Error::InvalidStructure("col_indices and values differ in length"));
        }
        if row_offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidStructure("row_offsets must be nondecreasing"));
        }
        for i in 0..n_rows {
            let cols = &col_indices[row_offsets[i]..row_offsets[i + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidStructure("column indices must increase within a row"));
            }
            if let Some(&c) = cols.last() {
                if c >= n_cols {
                    return Err(Error::IndexOutOfBounds {
                        row: i,
                        col: c,
                        rows: n_rows,
                        cols: n_cols,
                    });
                }
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut coo = CooMatrix::new(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            coo.entries.push((i, i, d));
        }
        Self::from_coo(&coo)
    }

    pub fn to_coo(&self) -> CooMatrix {
        CooMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            entries: self.iter().collect(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[span.clone()], &self.values[span])
    }

    /// Stored entries as `(row, col, value)`, row-major.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |k| vals[k])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.n_rows];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.n_cols {
            return Err(Error::DimensionMismatch {
                expected: self.n_cols,
                found: x.len(),
            });
        }
        if y.len() != self.n_rows {
            return Err(Error::DimensionMismatch {
                expected: self.n_rows,
                found: y.len(),
            });
        }
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
        Ok(())
    }
}

pub fn spmv(a: &CsrMatrix, x: &[f64]) -> Result<Vec<f64>> {
    a.spmv(x)
}

pub fn euclidean_norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

pub fn euclidean_distance(x: &[f64], y: &[f64]) -> f64 {
    libm::sqrt(x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// `‖Ax - b‖₂`.
pub fn residual_norm(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Result<f64> {
    if b.len() != a.n_rows {
        return Err(Error::DimensionMismatch {
            expected: a.n_rows,
            found: b.len(),
        });
    }
    let ax = a.spmv(x)?;
    Ok(euclidean_distance(&ax, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NormKind {
    /// Maximum absolute row sum.
    Infinity,
    /// Maximum absolute column sum.
    One,
    Frobenius,
}

impl NormKind {
    pub const ALL: [NormKind; 3] = [NormKind::Infinity, NormKind::One, NormKind::Frobenius];

    pub fn as_str(self) -> &'static str {
        match self {
            NormKind::Infinity => "infinity",
            NormKind::One => "one",
            NormKind::Frobenius => "frobenius",
        }
    }
}

impl core::fmt::Display for NormKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn require_square(a: &CsrMatrix) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare {
            rows: a.n_rows,
            cols: a.n_cols,
        })
    }
}

/// `‖I - A‖` in the requested norm, computed from the stored entries.
///
/// A diagonal entry contributes `|1 - a_ii|`; a missing diagonal entry contributes 1.
pub fn iteration_matrix_norm(a: &CsrMatrix, kind: NormKind) -> Result<f64> {
    require_square(a)?;
    let n = a.n_rows;
    // Entries of I - A, row by row, including the implicit diagonal.
    let entries = |i: usize| {
        let (cols, vals) = a.row(i);
        let has_diag = cols.binary_search(&i).is_ok();
        cols.iter()
            .zip(vals)
            .map(move |(&j, &v)| (j, if j == i { 1.0 - v } else { -v }))
            .chain((!has_diag).then_some((i, 1.0)))
    };
    let value = match kind {
        NormKind::Infinity => (0..n)
            .map(|i| entries(i).map(|(_, v)| libm::fabs(v)).sum::<f64>())
            .fold(0.0, f64::max),
        NormKind::One => {
            let mut col_sums = vec![0.0; n];
            for i in 0..n {
                for (j, v) in entries(i) {
                    col_sums[j] += libm::fabs(v);
                }
            }
            col_sums.into_iter().fold(0.0, f64::max)
        }
        NormKind::Frobenius => libm::sqrt((0..n).flat_map(entries).map(|(_, v)| v * v).sum()),
    };
    Ok(value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Contractive,
    NotContractive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Contractive => "contractive",
            Verdict::NotContractive => "not_contractive",
        }
    }
}

impl core::fmt::Display for Verdict {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The three norms of `I - A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormValues {
    pub infinity: f64,
    pub one: f64,
    pub frobenius: f64,
}

impl NormValues {
    pub fn get(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::Infinity => self.infinity,
            NormKind::One => self.one,
            NormKind::Frobenius => self.frobenius,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (NormKind, f64)> + '_ {
        NormKind::ALL.iter().map(move |&k| (k, self.get(k)))
    }
}

/// Contraction evidence for `T(x) = x - Ax + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionCertificate {
    /// Norm achieving the smallest value.
    pub norm_kind: NormKind,
    pub value: f64,
    pub verdict: Verdict,
    pub norms: NormValues,
    /// `det(I - A)` for small systems. Reported only; never used for the verdict.
    pub determinant_diagnostic: Option<f64>,
}

impl ContractionCertificate {
    pub fn is_contractive(&self) -> bool {
        self.verdict == Verdict::Contractive
    }

    /// Upper bound on the spectral norm `‖I - A‖₂`, which is the contraction
    /// factor in the Euclidean metric: `min(‖·‖_F, sqrt(‖·‖₁‖·‖∞))`.
    pub fn euclidean_factor(&self) -> f64 {
        self.norms
            .frobenius
            .min(libm::sqrt(self.norms.one * self.norms.infinity))
    }

    /// The same evidence judged by a single norm.
    pub fn restricted_to(&self, kind: NormKind) -> Self {
        let value = self.norms.get(kind);
        Self {
            norm_kind: kind,
            value,
            verdict: if value < 1.0 {
                Verdict::Contractive
            } else {
                Verdict::NotContractive
            },
            ..self.clone()
        }
    }
}

pub fn certify(a: &CsrMatrix) -> Result<ContractionCertificate> {
    require_square(a)?;
    let norms = NormValues {
        infinity: iteration_matrix_norm(a, NormKind::Infinity)?,
        one: iteration_matrix_norm(a, NormKind::One)?,
        frobenius: iteration_matrix_norm(a, NormKind::Frobenius)?,
    };
    let (norm_kind, value) = norms
        .iter()
        .fold((NormKind::Infinity, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    let verdict = if value < 1.0 {
        Verdict::Contractive
    } else {
        Verdict::NotContractive
    };
    let determinant_diagnostic = if a.n_rows <= DETERMINANT_MAX_DIM {
        Some(determinant_diagnostic(a)?)
    } else {
        None
    };
    Ok(ContractionCertificate {
        norm_kind,
        value,
        verdict,
        norms,
        determinant_diagnostic,
    })
}

/// `det(I - A)` for `n <= 12`.
pub fn determinant_diagnostic(a: &CsrMatrix) -> Result<f64> {
    require_square(a)?;
    if a.n_rows > DETERMINANT_MAX_DIM {
        return Err(Error::TooLarge {
            size: a.n_rows,
            limit: DETERMINANT_MAX_DIM,
        });
    }
    let mut m = DenseMatrix::identity(a.n_rows);
    for (i, j, v) in a.iter() {
        m.set(i, j, m.get(i, j) - v);
    }
    oracle::determinant(&m)
}

/// Left-scales the system by `diag(A)^{-1}`.
pub fn jacobi_precondition(a: &CsrMatrix, b: &[f64]) -> Result<(CsrMatrix, Vec<f64>)> {
    require_square(a)?;
    if b.len() != a.n_rows {
        return Err(Error::DimensionMismatch {
            expected: a.n_rows,
            found: b.len(),
        });
    }
    let diag = a.diagonal();
    if let Some(i) = diag.iter().position(|&d| d == 0.0) {
        return Err(Error::ZeroDiagonal(i));
    }
    let mut scaled = a.clone();
    for i in 0..a.n_rows {
        for k in a.row_offsets[i]..a.row_offsets[i + 1] {
            scaled.values[k] /= diag[i];
        }
    }
    let b_scaled = b.iter().zip(&diag).map(|(bi, d)| bi / d).collect();
    Ok((scaled, b_scaled))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preconditioner {
    #[default]
    None,
    Jacobi,
}

impl Preconditioner {
    pub fn as_str(self) -> &'static str {
        match self {
            Preconditioner::None => "none",
            Preconditioner::Jacobi => "jacobi",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub rule: StoppingRule,
    /// Starting vector; zero when absent.
    pub x0: Option<Vec<f64>>,
    pub preconditioner: Preconditioner,
    /// Iterate even when no norm certifies contraction, relying on divergence detection.
    pub force: bool,
}

impl SolveOptions {
    pub fn new(rule: StoppingRule) -> Self {
        Self {
            rule,
            x0: None,
            preconditioner: Preconditioner::None,
            force: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    /// `‖Ax - b‖₂` for the original, unscaled system.
    pub residual_norm: f64,
    /// `tolerance * (1 + ‖b‖₂)`.
    pub residual_tolerance: f64,
    /// Certificate of the system that was actually iterated.
    pub certificate: ContractionCertificate,
    pub fixed_point: FixedPointResult<Vec<f64>>,
    pub preconditioner: Preconditioner,
}

/// `T(x) = x - Ax + b` with the Euclidean metric.
#[derive(Debug, Clone, Copy)]
pub struct RichardsonMap<'a> {
    a: &'a CsrMatrix,
    b: &'a [f64],
}

impl<'a> RichardsonMap<'a> {
    pub fn new(a: &'a CsrMatrix, b: &'a [f64]) -> Result<Self> {
        require_square(a)?;
        if b.len() != a.n_rows {
            return Err(Error::DimensionMismatch {
                expected: a.n_rows,
                found: b.len(),
            });
        }
        Ok(Self { a, b })
    }
}

impl FixedPointMap for RichardsonMap<'_> {
    type Point = Vec<f64>;

    fn apply(&self, x: &Vec<f64>) -> Vec<f64> {
        let mut ax = vec![0.0; x.len()];
        self.a.spmv_into(x, &mut ax).expect("dimensions checked on construction");
        x.iter()
            .zip(&ax)
            .zip(self.b)
            .map(|((xi, axi), bi)| xi - axi + bi)
            .collect()
    }

    fn distance(&self, x: &Vec<f64>, y: &Vec<f64>) -> f64 {
        euclidean_distance(x, y)
    }
}

/// Solves `Ax = b` by iterating `x <- x - Ax + b`.
///
/// The system is certified first (after optional Jacobi scaling). When the
/// certificate bounds the Euclidean factor below one, that factor drives the
/// a-posteriori stopping test and the reported bounds; otherwise the raw step
/// test is used. Non-contractive systems are refused unless `force` is set.
/// Divergence and budget exhaustion are reported through the result status.
pub fn solve_fixed_point(
    a: &CsrMatrix,
    b: &[f64],
    options: &SolveOptions,
) -> Result<(SolveReport, IterationTrace<Vec<f64>>)> {
    require_square(a)?;
    let n = a.n_rows;
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let x0 = match &options.x0 {
        Some(x0) if x0.len() != n => {
            return Err(Error::DimensionMismatch { expected: n, found: x0.len() })
        }
        Some(x0) if x0.iter().any(|v| !v.is_finite()) => return Err(Error::NonFinite),
        Some(x0) => x0.clone(),
        None => vec![0.0; n],
    };

    let scaled;
    let (system, rhs): (&CsrMatrix, &[f64]) = match options.preconditioner {
        Preconditioner::None => (a, b),
        Preconditioner::Jacobi => {
            scaled = jacobi_precondition(a, b)?;
            (&scaled.0, &scaled.1)
        }
    };

    let certificate = certify(system)?;
    if !certificate.is_contractive() && !options.force {
        return Err(Error::NotContractive {
            factor: certificate.value,
        });
    }

    let mut rule = options.rule;
    let q = certificate.euclidean_factor();
    if crate::metric::is_contraction_factor(q) {
        rule.q_for_bounds = Some(q);
    }

    let map = RichardsonMap::new(system, rhs)?;
    let (fixed_point, trace) = banach_iterate(&map, x0, &rule)?;
    let residual = residual_norm(a, &fixed_point.point, b)?;

    let report = SolveReport {
        solution: fixed_point.point.clone(),
        residual_norm: residual,
        residual_tolerance: rule.tolerance * (1.0 + euclidean_norm(b)),
        certificate,
        fixed_point,
        preconditioner: options.preconditioner,
    };
    Ok((report, trace))
}

/// Systems printed in the accompanying examples.
pub mod fixtures {
    use super::*;

    fn from_dense(n: usize, rows: &[f64]) -> CsrMatrix {
        let mut coo = CooMatrix::new(n, n);
        for (k, &v) in rows.iter().enumerate() {
            if v != 0.0 {
                coo.push(k / n, k % n, v).expect("in bounds");
            }
        }
        CsrMatrix::from_coo(&coo)
    }

    /// 3x3 system whose iteration matrix has determinant 1/2 but is not contractive.
    pub fn example7_matrix() -> CsrMatrix {
        #[rustfmt::skip]
        let rows = [
            1.5, 1.0, 0.0,
            0.0, 1.0, 1.0,
            0.0, 1.0, 2.0 / 3.0,
        ];
        from_dense(3, &rows)
    }

    pub fn example7_rhs() -> Vec<f64> {
        vec![2.0, 3.0, 1.0]
    }

    pub fn example7_solution() -> Vec<f64> {
        vec![10.0 / 3.0, -3.0, 6.0]
    }

    /// 6x6 sparse system. Rank 5: columns 0 and 1 are both supported on row 0 only.
    pub fn example9_matrix() -> CsrMatrix {
        #[rustfmt::skip]
        let rows = [
            11.0, 22.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 44.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 2.0, 66.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 77.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 88.0, 99.0,
            0.0, 0.0, 0.0, 0.0, 0.0, 1.0 / 1111.0,
        ];
        from_dense(6, &rows)
    }

    pub fn example9_rhs() -> Vec<f64> {
        vec![33.0, 44.0, 2.0, 77.0, 187.0, 1.0 / 1111.0]
    }

    pub fn example9_solution() -> Vec<f64> {
        vec![1.0, 1.0, 1.0, 0.0, 1.0, 1.0]
    }
}
