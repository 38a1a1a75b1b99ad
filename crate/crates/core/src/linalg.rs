//! Compressed-row sparse matrices and a Jacobi-preconditioned conjugate
//! gradient solver.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::par;

/// Square or rectangular matrix in CSR layout. Column indices are strictly
/// increasing inside each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Build from raw CSR arrays, checking the layout invariants.
    pub fn from_csr(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != n_rows + 1 {
            return Err(Error::DimensionMismatch {
                expected: n_rows + 1,
                found: row_offsets.len(),
            });
        }
        if col_indices.len() != values.len() || row_offsets[n_rows] != values.len() {
            return Err(Error::DimensionMismatch {
                expected: row_offsets[n_rows],
                found: values.len(),
            });
        }
        for row in 0..n_rows {
            let (start, end) = (row_offsets[row], row_offsets[row + 1]);
            if start > end {
                return Err(Error::param("row_offsets", format!("decreasing at row {row}")));
            }
            let cols = &col_indices[start..end];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::param(
                    "col_indices",
                    format!("not strictly increasing in row {row}"),
                ));
            }
            if cols.last().is_some_and(|&c| c >= n_cols) {
                return Err(Error::param("col_indices", format!("out of range in row {row}")));
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Compress coordinate triplets, summing duplicates. The summation order
    /// follows the input order, so identical input gives identical bits.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        // stable: duplicates stay in input order
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));

        let mut row_offsets = vec![0usize; n_rows + 1];
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for k in order {
            let (r, c, v) = triplets[k];
            assert!(r < n_rows && c < n_cols, "triplet ({r}, {c}) out of range");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_indices.push(c);
                values.push(v);
                row_offsets[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n_rows {
            row_offsets[r + 1] += row_offsets[r];
        }
        Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let triplets: Vec<_> = rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(move |(j, &v)| (i, j, v))
            })
            .collect();
        Self::from_triplets(n_rows, n_cols, &triplets)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            row_offsets: vec![0; n_rows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
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

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterate the stored entries of one row as `(col, value)`.
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_offsets[row]..self.row_offsets[row + 1];
        self.col_indices[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    /// Stored value at `(row, col)`, zero when absent.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        let range = self.row_offsets[row]..self.row_offsets[row + 1];
        match self.col_indices[range.clone()].binary_search(&col) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols))
            .map(|i| self.get(i, i))
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (i, row) in dense.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        dense
    }

    /// Largest `|a_ij - a_ji|` over stored entries.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = if self.n_rows == self.n_cols { 0.0 } else { f64::INFINITY };
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                if j < self.n_rows {
                    worst = worst.max((v - self.get(j, i)).abs());
                }
            }
        }
        worst
    }

    /// `A x` into a new vector.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.n_rows];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    /// `y = A x`, row-parallel when the `parallel` feature is on and the
    /// matrix is large enough.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.check_spmv_dims(x, y)?;
        par::fill_indexed(y, par::MIN_PAR_ROWS, |i| self.row_dot(i, x));
        Ok(())
    }

    /// `y = A x` on the calling thread only.
    pub fn spmv_into_sequential(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.check_spmv_dims(x, y)?;
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row_dot(i, x);
        }
        Ok(())
    }

    fn check_spmv_dims(&self, x: &[f64], y: &[f64]) -> Result<()> {
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
        Ok(())
    }

    #[inline]
    fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let (start, end) = (self.row_offsets[i], self.row_offsets[i + 1]);
        self.col_indices[start..end]
            .iter()
            .zip(&self.values[start..end])
            .map(|(&j, &v)| v * x[j])
            .sum()
    }

    /// Quadratic form `xᵀ A y`.
    pub fn inner(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let ay = self.spmv(y)?;
        if x.len() != ay.len() {
            return Err(Error::DimensionMismatch {
                expected: ay.len(),
                found: x.len(),
            });
        }
        Ok(dot(x, &ay))
    }

    /// `s·A` with the same pattern.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| s * v).collect(),
            ..self.clone()
        }
    }

    /// `a·A + b·B` over the union sparsity pattern.
    pub fn linear_combination(a: f64, lhs: &SparseMatrix, b: f64, rhs: &SparseMatrix) -> Result<Self> {
        if lhs.n_rows != rhs.n_rows || lhs.n_cols != rhs.n_cols {
            return Err(Error::DimensionMismatch {
                expected: lhs.n_rows * lhs.n_cols,
                found: rhs.n_rows * rhs.n_cols,
            });
        }
        let mut row_offsets = Vec::with_capacity(lhs.n_rows + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::with_capacity(lhs.nnz().max(rhs.nnz()));
        let mut values = Vec::with_capacity(lhs.nnz().max(rhs.nnz()));
        for i in 0..lhs.n_rows {
            let mut left = lhs.row(i).peekable();
            let mut right = rhs.row(i).peekable();
            loop {
                let entry = match (left.peek(), right.peek()) {
                    (None, None) => break,
                    (Some(&(j, v)), None) => {
                        left.next();
                        (j, a * v)
                    }
                    (None, Some(&(j, w))) => {
                        right.next();
                        (j, b * w)
                    }
                    (Some(&(j, v)), Some(&(k, w))) => {
                        if j < k {
                            left.next();
                            (j, a * v)
                        } else if k < j {
                            right.next();
                            (k, b * w)
                        } else {
                            left.next();
                            right.next();
                            (j, a * v + b * w)
                        }
                    }
                };
                col_indices.push(entry.0);
                values.push(entry.1);
            }
            row_offsets.push(values.len());
        }
        Ok(Self {
            n_rows: lhs.n_rows,
            n_cols: lhs.n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Extract the block `A[rows, cols]`. Both index lists must be sorted and
    /// duplicate-free.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut col_map = vec![usize::MAX; self.n_cols];
        for (new, &old) in cols.iter().enumerate() {
            col_map[old] = new;
        }
        let mut row_offsets = Vec::with_capacity(rows.len() + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        for &r in rows {
            for (c, v) in self.row(r) {
                let mapped = col_map[c];
                if mapped != usize::MAX {
                    col_indices.push(mapped);
                    values.push(v);
                }
            }
            row_offsets.push(values.len());
        }
        Self {
            n_rows: rows.len(),
            n_cols: cols.len(),
            row_offsets,
            col_indices,
            values,
        }
    }

    /// MatrixMarket coordinate text (1-based indices, general storage).
    pub fn to_matrix_market(&self) -> String {
        let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
        let _ = writeln!(out, "{} {} {}", self.n_rows, self.n_cols, self.nnz());
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                let _ = writeln!(out, "{} {} {:e}", i + 1, j + 1, v);
            }
        }
        out
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += a x`
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    pub rel_tol: f64,
    /// `None` means `10·n`.
    pub max_iter: Option<usize>,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iter: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solve `A x = b` for symmetric positive definite `A` by Jacobi-preconditioned
/// conjugate gradients starting from `x0`. Converged when
/// `‖b − A x‖₂ ≤ rel_tol·‖b‖₂`.
pub fn cg_solve(a: &SparseMatrix, b: &[f64], x0: &[f64], options: CgOptions) -> Result<CgSolution> {
    let n = a.n_rows();
    if a.n_cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.n_cols(),
        });
    }
    for len in [b.len(), x0.len()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: len,
            });
        }
    }
    if !(options.rel_tol > 0.0) {
        return Err(Error::param("rel_tol", "must be positive"));
    }
    let max_iter = options.max_iter.unwrap_or(10 * n.max(1));

    let inv_diag: Vec<f64> = a
        .diagonal()
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            if d > 0.0 {
                Ok(1.0 / d)
            } else {
                Err(Error::param("matrix", format!("non-positive diagonal at row {i}")))
            }
        })
        .collect::<Result<_>>()?;

    let b_norm = norm2(b);
    let mut x = x0.to_vec();
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgSolution {
            x,
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let threshold = options.rel_tol * b_norm;

    let mut r = a.spmv(&x)?;
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut r_norm = norm2(&r);
    if r_norm <= threshold {
        return Ok(CgSolution {
            x,
            iterations: 0,
            relative_residual: r_norm / b_norm,
        });
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);

    for iteration in 1..=max_iter {
        a.spmv_into(&p, &mut ap)?;
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::SolverFailure {
                iterations: iteration,
                residual: r_norm / b_norm,
            });
        }
        let step = rz / pap;
        axpy(step, &p, &mut x);
        axpy(-step, &ap, &mut r);
        r_norm = norm2(&r);
        if r_norm <= threshold {
            return Ok(CgSolution {
                x,
                iterations: iteration,
                relative_residual: r_norm / b_norm,
            });
        }
        for ((zi, ri), di) in z.iter_mut().zip(&r).zip(&inv_diag) {
            *zi = ri * di;
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Err(Error::SolverFailure {
        iterations: max_iter,
        residual: r_norm / b_norm,
    })
}
