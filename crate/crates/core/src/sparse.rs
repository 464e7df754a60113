//! Compressed-sparse-row operators over `f64`.
//!
//! Small on purpose: assembly from triplets, products, transposes, principal
//! submatrices and a hand-off to faer for factorization.

use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SparseError {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    Dimension { op: &'static str, left: (usize, usize), right: (usize, usize) },
    #[error("index ({row}, {col}) out of bounds for a {nrows}x{ncols} operator")]
    OutOfBounds { row: usize, col: usize, nrows: usize, ncols: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparseOp {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseOp {
    /// Duplicates are summed; entries that sum to exactly zero are dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self, SparseError> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nrows];
        for &(r, c, v) in triplets {
            if r >= nrows || c >= ncols {
                return Err(SparseError::OutOfBounds { row: r, col: c, nrows, ncols });
            }
            rows[r].push((c, v));
        }
        Ok(Self::from_rows(nrows, ncols, rows))
    }

    fn from_rows(nrows: usize, ncols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_unstable_by_key(|&(c, _)| c);
            let mut k = 0;
            while k < row.len() {
                let c = row[k].0;
                let mut v = 0.0;
                while k < row.len() && row[k].0 == c {
                    v += row[k].1;
                    k += 1;
                }
                if v != 0.0 {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        SparseOp { nrows, ncols, indptr, indices, values }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseOp { nrows, ncols, indptr: vec![0; nrows + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    pub fn diag(d: &[f64]) -> Self {
        let rows = d.iter().enumerate().map(|(i, &v)| vec![(i, v)]).collect();
        Self::from_rows(d.len(), d.len(), rows)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(column, value)` pairs of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(j, _)| j == c).map_or(0.0, |(_, v)| v)
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols, "matvec: input length");
        assert_eq!(y.len(), self.nrows, "matvec: output length");
        for (r, out) in y.iter_mut().enumerate() {
            *out = self.row(r).map(|(c, v)| v * x[c]).sum();
        }
    }

    pub fn transpose(&self) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.ncols];
        for (r, c, v) in self.triplets() {
            rows[c].push((r, v));
        }
        Self::from_rows(self.ncols, self.nrows, rows)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        if s == 0.0 {
            return Self::zeros(self.nrows, self.ncols);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self, SparseError> {
        if self.shape() != other.shape() {
            return Err(SparseError::Dimension { op: "add", left: self.shape(), right: other.shape() });
        }
        let rows = (0..self.nrows).map(|r| self.row(r).chain(other.row(r)).collect()).collect();
        Ok(Self::from_rows(self.nrows, self.ncols, rows))
    }

    /// `self · rhs`.
    pub fn compose(&self, rhs: &Self) -> Result<Self, SparseError> {
        if self.ncols != rhs.nrows {
            return Err(SparseError::Dimension { op: "compose", left: self.shape(), right: rhs.shape() });
        }
        let mut acc = vec![0.0; rhs.ncols];
        let mut touched = vec![false; rhs.ncols];
        let mut pattern = Vec::new();
        let mut rows = Vec::with_capacity(self.nrows);
        for r in 0..self.nrows {
            for (k, a) in self.row(r) {
                for (c, b) in rhs.row(k) {
                    if !touched[c] {
                        touched[c] = true;
                        pattern.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            let row: Vec<(usize, f64)> = pattern.iter().map(|&c| (c, acc[c])).collect();
            for &c in &pattern {
                acc[c] = 0.0;
                touched[c] = false;
            }
            pattern.clear();
            rows.push(row);
        }
        Ok(Self::from_rows(self.nrows, rhs.ncols, rows))
    }

    /// `selfᵀ · diag(w) · self`.
    pub fn weighted_gram(&self, w: &[f64]) -> Result<Self, SparseError> {
        if w.len() != self.nrows {
            return Err(SparseError::Dimension { op: "weighted_gram", left: self.shape(), right: (w.len(), w.len()) });
        }
        self.transpose().compose(&Self::diag(w).compose(self)?)
    }

    /// Rows and columns listed in `keep`, in that order.
    pub fn principal_submatrix(&self, keep: &[usize]) -> Self {
        assert_eq!(self.nrows, self.ncols, "principal submatrix of a non-square operator");
        let mut map = vec![usize::MAX; self.ncols];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let rows = keep
            .iter()
            .map(|&r| self.row(r).filter(|&(c, _)| map[c] != usize::MAX).map(|(c, v)| (map[c], v)).collect())
            .collect();
        Self::from_rows(keep.len(), keep.len(), rows)
    }

    /// Columns listed in `keep`, in that order.
    pub fn select_columns(&self, keep: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.ncols];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let rows = (0..self.nrows)
            .map(|r| self.row(r).filter(|&(c, _)| map[c] != usize::MAX).map(|(c, v)| (map[c], v)).collect())
            .collect();
        Self::from_rows(self.nrows, keep.len(), rows)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    /// Largest `|A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let t = self.transpose();
        self.triplets()
            .map(|(r, c, v)| (v - t.get(r, c)).abs())
            .chain(t.triplets().map(|(r, c, v)| (v - self.get(r, c)).abs()))
            .fold(0.0, f64::max)
    }

    pub fn to_faer(&self) -> SparseColMat<usize, f64> {
        let trips: Vec<Triplet<usize, usize, f64>> =
            self.triplets().map(|(row, col, val)| Triplet { row, col, val }).collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &trips)
            .expect("indices are in bounds by construction")
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SparseOp {
        SparseOp::from_triplets(2, 3, &[(0, 0, 1.0), (0, 2, 2.0), (1, 1, 3.0), (1, 1, 1.0), (0, 1, 0.5), (0, 1, -0.5)])
            .unwrap()
    }

    #[test]
    fn triplets_sum_and_drop_zeros() {
        let a = sample();
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(1, 1), 4.0);
        assert_eq!(a.get(0, 1), 0.0);
        assert!(SparseOp::from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn matvec_and_transpose() {
        let a = sample();
        assert_eq!(a.matvec(&[1.0, 1.0, 1.0]), vec![3.0, 4.0]);
        assert_eq!(a.transpose().matvec(&[1.0, 2.0]), vec![1.0, 8.0, 2.0]);
        assert_eq!(a.transpose().transpose(), a);
    }

    #[test]
    fn compose_matches_dense() {
        let a = sample();
        let g = a.transpose().compose(&a).unwrap();
        let d = a.to_dense();
        let dd = d.transpose() * &d;
        for (r, c, v) in g.triplets() {
            assert!((dd[(r, c)] - v).abs() < 1e-14);
        }
        assert!(a.compose(&a).is_err());
        assert_eq!(g.asymmetry(), 0.0);
    }

    #[test]
    fn weighted_gram_and_submatrix() {
        let a = sample();
        let g = a.weighted_gram(&[2.0, 1.0]).unwrap();
        assert_eq!(g.get(0, 0), 2.0);
        assert_eq!(g.get(0, 2), 4.0);
        assert_eq!(g.get(1, 1), 16.0);
        let s = g.principal_submatrix(&[2, 0]);
        assert_eq!(s.shape(), (2, 2));
        assert_eq!(s.get(0, 1), 4.0);
        assert_eq!(s.diagonal(), vec![8.0, 2.0]);
        assert_eq!(a.select_columns(&[2]).matvec(&[1.0]), vec![2.0, 0.0]);
    }

    #[test]
    fn add_and_scale() {
        let a = sample();
        let b = a.add(&a.scale(-1.0)).unwrap();
        assert_eq!(b.nnz(), 0);
        assert!(a.add(&SparseOp::identity(2)).is_err());
        assert_eq!(SparseOp::identity(3).to_faer().compute_nnz(), 3);
    }
}
