//! Compressed sparse row storage and the direct solver.
//!
//! Assembly accumulates into a [`TripletBuilder`]; duplicates are summed
//! when the CSR matrix is built. Factorization is delegated to faer's
//! sparse LU with partial pivoting.

use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};

use crate::error::{Error, Result};

/// Relative residual accepted from the direct solver.
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        TripletBuilder { nrows, ncols, entries: Vec::new() }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        TripletBuilder { nrows, ncols, entries: Vec::with_capacity(cap) }
    }

    #[inline]
    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.entries.push((row, col, value));
    }

    /// Adds `scale * m` with rows and columns remapped; entries whose row or
    /// column maps to `None` are dropped.
    pub fn add_block(
        &mut self,
        m: &SparseMatrix,
        scale: f64,
        row_map: impl Fn(usize) -> Option<usize>,
        col_map: impl Fn(usize) -> Option<usize>,
    ) {
        for (i, j, v) in m.iter() {
            if let (Some(r), Some(c)) = (row_map(i), col_map(j)) {
                self.add(r, c, scale * v);
            }
        }
    }

    pub fn build(mut self) -> SparseMatrix {
        self.entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in self.entries {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix { nrows: self.nrows, ncols: self.ncols, row_ptr, col_idx, values }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn identity(n: usize) -> Self {
        SparseMatrix { nrows: n, ncols: n, row_ptr: (0..=n).collect(), col_idx: (0..n).collect(), values: vec![1.0; n] }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let ncols = rows.first().map_or(0, Vec::len);
        let mut b = TripletBuilder::new(rows.len(), ncols);
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    b.add(i, j, v);
                }
            }
        }
        b.build()
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.col_idx[k], self.values[k]))
        })
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.col_idx[k], self.values[k]))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let cols = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        match cols.binary_search(&j) {
            Ok(k) => self.values[self.row_ptr[i] + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch { expected: self.ncols, found: x.len() });
        }
        Ok((0..self.nrows).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect())
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut b = TripletBuilder::with_capacity(self.ncols, self.nrows, self.nnz());
        for (i, j, v) in self.iter() {
            b.add(j, i, v);
        }
        b.build()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows).map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// `max |a_ij - a_ji| / max |a_ij|`.
    pub fn asymmetry(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let t = self.transpose();
        let mut worst: f64 = 0.0;
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                worst = worst.max((v - t.get(i, j)).abs());
            }
            for (j, v) in t.row(i) {
                worst = worst.max((v - self.get(i, j)).abs());
            }
        }
        worst / scale
    }

    fn to_faer(&self) -> Result<SparseColMat<usize, f64>> {
        let triplets: Vec<Triplet<usize, usize, f64>> = self.iter().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &triplets)
            .map_err(|e| Error::SingularMatrix(format!("cannot build factorization input: {e:?}")))
    }
}

/// `||A x - b||_inf / (||A||_inf ||x||_inf + ||b||_inf)`.
pub fn relative_residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = match a.mul_vec(x) {
        Ok(v) => v,
        Err(_) => return f64::INFINITY,
    };
    let r = ax.iter().zip(b).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
    let xn = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let bn = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let denom = a.norm_inf() * xn + bn;
    if denom == 0.0 {
        0.0
    } else {
        r / denom
    }
}

/// A sparse LU factorization that can be reused for several right-hand sides.
pub struct LuFactorization {
    matrix: SparseMatrix,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
}

impl std::fmt::Debug for LuFactorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LuFactorization").field("n", &self.matrix.nrows).finish()
    }
}

impl LuFactorization {
    pub fn new(a: &SparseMatrix) -> Result<Self> {
        if a.nrows != a.ncols {
            return Err(Error::DimensionMismatch { expected: a.nrows, found: a.ncols });
        }
        let lu = a.to_faer()?.sp_lu().map_err(|e| Error::SingularMatrix(format!("LU factorization failed: {e:?}")))?;
        Ok(LuFactorization { matrix: a.clone(), lu })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows
    }

    /// Solves `A x = b`. A non-finite solution or a residual above
    /// [`SOLVE_RESIDUAL_TOL`] is reported as a singular matrix.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.matrix.nrows;
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.len() });
        }
        let rhs = faer::Col::<f64>::from_fn(n, |i| b[i]);
        let sol = self.lu.solve(&rhs);
        let x: Vec<f64> = (0..n).map(|i| sol[i]).collect();
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularMatrix("solution has non-finite entries".into()));
        }
        let res = relative_residual(&self.matrix, &x, b);
        if !(res <= SOLVE_RESIDUAL_TOL) {
            return Err(Error::SingularMatrix(format!("relative residual {res:.3e} after direct solve")));
        }
        Ok(x)
    }
}

pub fn solve_sparse(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    LuFactorization::new(a)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let mut b = TripletBuilder::new(2, 2);
        b.add(0, 1, 1.0);
        b.add(0, 1, 2.5);
        b.add(1, 0, -1.0);
        let m = b.build();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 1), 3.5);
        assert_eq!(m.get(1, 1), 0.0);
    }

    #[test]
    fn identity_solve() {
        let b = vec![1.0, -2.0, 3.5];
        assert_eq!(solve_sparse(&SparseMatrix::identity(3), &b).unwrap(), b);
    }

    #[test]
    fn two_by_two() {
        let a = SparseMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let x = solve_sparse(&a, &[3.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn needs_pivoting() {
        let a = SparseMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let x = solve_sparse(&a, &[2.0, 5.0]).unwrap();
        assert_eq!(x, vec![5.0, 2.0]);
    }

    #[test]
    fn singular_is_reported() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(solve_sparse(&a, &[1.0, 0.0]), Err(Error::SingularMatrix(_))));
        let empty_col = SparseMatrix::from_dense(&[vec![1.0, 0.0], vec![3.0, 0.0]]);
        assert!(matches!(solve_sparse(&empty_col, &[1.0, 0.0]), Err(Error::SingularMatrix(_))));
    }

    #[test]
    fn rectangular_is_rejected() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 2.0, 3.0]]);
        assert!(matches!(solve_sparse(&a, &[1.0]), Err(Error::DimensionMismatch { .. })));
    }
}
