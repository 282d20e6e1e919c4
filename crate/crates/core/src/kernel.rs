//! Row-stochastic kernels over an enumerated state space, plus the two
//! relabelings that generate a wave system: transport along `g^{i-1}` and
//! the column shift by `g^{-1}`.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::permutation::Permutation;
use crate::space::StateSpace;

/// Largest state space stored densely; above it rows are compressed.
pub const DENSE_LIMIT: usize = 4096;

/// Allowed deviation of a row sum from 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
struct Csr {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Dense(DenseMatrix),
    Sparse(Csr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovKernel {
    space: StateSpace,
    storage: Storage,
}

/// Nonzero entries of one row in increasing column order.
pub enum RowIter<'a> {
    Dense(std::iter::Enumerate<std::slice::Iter<'a, f64>>),
    Sparse(std::iter::Zip<std::slice::Iter<'a, usize>, std::slice::Iter<'a, f64>>),
}

impl Iterator for RowIter<'_> {
    type Item = (usize, f64);

    #[inline]
    fn next(&mut self) -> Option<(usize, f64)> {
        match self {
            RowIter::Dense(it) => it.find(|(_, v)| **v != 0.0).map(|(j, v)| (j, *v)),
            RowIter::Sparse(it) => it.next().map(|(j, v)| (*j, *v)),
        }
    }
}

fn validate_row(row: usize, entries: impl Iterator<Item = (usize, f64)>) -> Result<()> {
    let mut sum = 0.0;
    for (col, value) in entries {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(Error::NegativeEntry { row, col, value });
        }
        sum += value;
    }
    if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
        return Err(Error::RowSumViolation { row, sum });
    }
    Ok(())
}

/// Validating constructor from a full matrix; storage is chosen by size.
pub fn make_kernel(space: StateSpace, entries: &DenseMatrix) -> Result<MarkovKernel> {
    MarkovKernel::from_dense(space, entries.clone(), DENSE_LIMIT)
}

impl MarkovKernel {
    /// Validates `entries` and stores densely when `size <= dense_limit`.
    pub fn from_dense(space: StateSpace, entries: DenseMatrix, dense_limit: usize) -> Result<Self> {
        let n = space.size();
        if entries.rows() != n || entries.cols() != n {
            return Err(Error::BadShape {
                rows: entries.rows(),
                cols: entries.cols(),
                expected: n,
            });
        }
        for i in 0..n {
            validate_row(i, entries.row(i).iter().cloned().enumerate())?;
        }
        if n <= dense_limit {
            Ok(Self {
                space,
                storage: Storage::Dense(entries),
            })
        } else {
            let rows = (0..n)
                .map(|i| {
                    entries
                        .row(i)
                        .iter()
                        .enumerate()
                        .filter(|(_, v)| **v != 0.0)
                        .map(|(j, v)| (j, *v))
                        .collect()
                })
                .collect();
            Ok(Self::from_sparse_rows_unchecked(space, rows, dense_limit))
        }
    }

    /// Validating constructor from per-row `(column, value)` lists.
    /// Duplicate columns within a row are summed.
    pub fn from_sparse_rows(space: StateSpace, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n = space.size();
        if rows.len() != n {
            return Err(Error::BadShape {
                rows: rows.len(),
                cols: n,
                expected: n,
            });
        }
        let mut merged = Vec::with_capacity(n);
        for (i, mut row) in rows.into_iter().enumerate() {
            if let Some((j, _)) = row.iter().find(|(j, _)| *j >= n) {
                return Err(Error::BadShape {
                    rows: i + 1,
                    cols: j + 1,
                    expected: n,
                });
            }
            row.sort_by_key(|(j, _)| *j);
            let mut out: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (j, v) in row {
                match out.last_mut() {
                    Some((lj, lv)) if *lj == j => *lv += v,
                    _ => out.push((j, v)),
                }
            }
            validate_row(i, out.iter().cloned())?;
            out.retain(|(_, v)| *v != 0.0);
            merged.push(out);
        }
        Ok(Self::from_sparse_rows_unchecked(space, merged, DENSE_LIMIT))
    }

    /// Rows must already be valid and sorted by column.
    pub(crate) fn from_sparse_rows_unchecked(
        space: StateSpace,
        rows: Vec<Vec<(usize, f64)>>,
        dense_limit: usize,
    ) -> Self {
        let n = space.size();
        if n <= dense_limit {
            let mut m = DenseMatrix::zeros(n, n);
            for (i, row) in rows.iter().enumerate() {
                for &(j, v) in row {
                    m.add_to(i, j, v);
                }
            }
            return Self {
                space,
                storage: Storage::Dense(m),
            };
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (j, v) in row {
                cols.push(j);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self {
            space,
            storage: Storage::Sparse(Csr {
                row_ptr,
                cols,
                vals,
            }),
        }
    }

    /// Wraps an already-stochastic dense matrix (e.g. a product of kernels).
    pub(crate) fn from_dense_unchecked(space: StateSpace, m: DenseMatrix) -> Self {
        Self {
            space,
            storage: Storage::Dense(m),
        }
    }

    pub fn identity(space: StateSpace) -> Self {
        let n = space.size();
        Self::from_sparse_rows_unchecked(space, (0..n).map(|i| vec![(i, 1.0)]).collect(), DENSE_LIMIT)
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn size(&self) -> usize {
        self.space.size()
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    /// Replaces the state labels (same size).
    pub fn relabel(mut self, space: StateSpace) -> Result<Self> {
        self.space.check_same(&space)?;
        self.space = space;
        Ok(self)
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m.get(x, y),
            Storage::Sparse(c) => {
                let range = c.row_ptr[x]..c.row_ptr[x + 1];
                match c.cols[range.clone()].binary_search(&y) {
                    Ok(k) => c.vals[range.start + k],
                    Err(_) => 0.0,
                }
            }
        }
    }

    pub fn row(&self, x: usize) -> RowIter<'_> {
        match &self.storage {
            Storage::Dense(m) => RowIter::Dense(m.row(x).iter().enumerate()),
            Storage::Sparse(c) => {
                let r = c.row_ptr[x]..c.row_ptr[x + 1];
                RowIter::Sparse(c.cols[r.clone()].iter().zip(c.vals[r].iter()))
            }
        }
    }

    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(m) => m.as_slice().iter().filter(|v| **v != 0.0).count(),
            Storage::Sparse(c) => c.vals.len(),
        }
    }

    /// Row vector times kernel: `(mu K)(y) = sum_x mu(x) K(x, y)`.
    pub fn left_mul(&self, mu: &[f64]) -> Vec<f64> {
        assert_eq!(mu.len(), self.size());
        match &self.storage {
            Storage::Dense(m) => m.left_mul_vec(mu),
            Storage::Sparse(_) => {
                let mut out = vec![0.0; self.size()];
                for (x, &w) in mu.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    for (y, v) in self.row(x) {
                        out[y] += w * v;
                    }
                }
                out
            }
        }
    }

    /// Kernel acting on a function: `(K f)(x) = sum_y K(x, y) f(y)`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.size());
        (0..self.size())
            .map(|x| self.row(x).map(|(y, v)| v * f[y]).sum())
            .collect()
    }

    /// `P * self` for a dense `P` with `size` columns; costs `rows * nnz`.
    pub fn right_mul_dense(&self, p: &DenseMatrix) -> DenseMatrix {
        assert_eq!(p.cols(), self.size());
        let mut out = DenseMatrix::zeros(p.rows(), self.size());
        for i in 0..p.rows() {
            let prow = p.row(i);
            let orow = out.row_mut(i);
            for (z, &a) in prow.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (y, v) in self.row(z) {
                    orow[y] += a * v;
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse(_) => {
                let n = self.size();
                let mut m = DenseMatrix::zeros(n, n);
                for x in 0..n {
                    for (y, v) in self.row(x) {
                        m.set(x, y, v);
                    }
                }
                m
            }
        }
    }

    /// Dense copy, refusing above [`DENSE_LIMIT`].
    pub fn to_dense_checked(&self) -> Result<DenseMatrix> {
        if self.size() > DENSE_LIMIT {
            return Err(Error::TooLarge {
                size: self.size(),
                limit: DENSE_LIMIT,
            });
        }
        Ok(self.to_dense())
    }

    /// Sum of column `y`.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.size()];
        for x in 0..self.size() {
            for (y, v) in self.row(x) {
                out[y] += v;
            }
        }
        out
    }

    /// `max |K(x,y) - K(y,x)|`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut d = 0.0_f64;
        for x in 0..self.size() {
            for (y, v) in self.row(x) {
                d = d.max((v - self.get(y, x)).abs());
            }
        }
        d
    }

    pub fn min_diagonal(&self) -> f64 {
        (0..self.size())
            .map(|x| self.get(x, x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Maps every entry `(x, y)` to `(row_map(x), col_map(y))` for bijections
    /// given as lookup tables; the row sums are untouched.
    fn relabel_entries(&self, source_row: impl Fn(usize) -> usize, col_map: impl Fn(usize) -> usize) -> Self {
        let n = self.size();
        let rows = (0..n)
            .map(|x| {
                let mut row: Vec<(usize, f64)> = self.row(source_row(x)).map(|(c, v)| (col_map(c), v)).collect();
                row.sort_by_key(|(j, _)| *j);
                row
            })
            .collect();
        let limit = if self.is_dense() { usize::MAX } else { 0 };
        Self::from_sparse_rows_unchecked(self.space.clone(), rows, limit)
    }
}

/// `K_i(x, y) = K(g^{i-1} x, g^{i-1} y)`; `i = 1` returns `K` itself.
pub fn transport_kernel(k: &MarkovKernel, g: &Permutation, i: u64) -> Result<MarkovKernel> {
    if g.len() != k.size() {
        return Err(Error::SpaceMismatch {
            left: k.size(),
            right: g.len(),
        });
    }
    if i == 0 {
        return Err(Error::InvalidArgument("transport index starts at 1".into()));
    }
    if i == 1 {
        return Ok(k.clone());
    }
    let m = ((i - 1) % g.order().max(1)) as i64;
    // K_i(x, .) is row g^m x of K with column c landing on y = g^{-m} c.
    Ok(k.relabel_entries(|x| g.apply_pow(x, m), |c| g.apply_pow(c, -m)))
}

/// `K~(x, y) = K(x, g^{-1} y)`.
pub fn shift_kernel(k: &MarkovKernel, g: &Permutation) -> Result<MarkovKernel> {
    if g.len() != k.size() {
        return Err(Error::SpaceMismatch {
            left: k.size(),
            right: g.len(),
        });
    }
    Ok(k.relabel_entries(|x| x, |c| g.apply(c)))
}
