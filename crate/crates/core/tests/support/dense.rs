//! Dense `f64` eigen-oracle built on nalgebra.

use eigenformats::matrix::SparseMatrix;
use nalgebra::{DMatrix, SymmetricEigen};

pub fn to_dense(m: &SparseMatrix) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(m.n_rows(), m.n_cols());
    for e in m.entries() {
        d[(e.row, e.col)] += e.value.to_f64();
    }
    d
}

/// Eigenvalues of a symmetric matrix, sorted by decreasing magnitude.
pub fn eigenvalues(m: &SparseMatrix) -> Vec<f64> {
    let eig = SymmetricEigen::new(to_dense(m));
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| b.abs().partial_cmp(&a.abs()).unwrap());
    v
}
