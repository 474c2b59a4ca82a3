//! Small dense linear-algebra helpers shared by the state modules.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Tolerance for symmetry checks, relative to the largest entry.
pub const SYMMETRY_TOL: f64 = 1e-10;

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Largest entry of `|m - mᵀ|`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Number of modes of a `2n x 2n` matrix.
pub fn mode_count(m: &DMatrix<f64>) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 || m.nrows() % 2 != 0 {
        return Err(Error::Dimension(format!(
            "expected an even, non-zero dimension, got {}",
            m.nrows()
        )));
    }
    Ok(m.nrows() / 2)
}

/// Checks symmetry within `SYMMETRY_TOL * max(1, |m|_max)` and returns the
/// symmetrized matrix.
pub fn symmetrized(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let asym = asymmetry(m);
    if asym > SYMMETRY_TOL * max_abs(m).max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    Ok((m + m.transpose()) * 0.5)
}

/// Applies `f` to the eigenvalues of a symmetric matrix.
pub fn sym_apply(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// Block diagonal `a ⊕ b`.
pub fn direct_sum(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = DMatrix::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

/// Diagonal `diag(v, v)` used for Williamson normal forms.
pub fn doubled_diagonal(v: &[f64]) -> DMatrix<f64> {
    let n = v.len();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for (j, &x) in v.iter().enumerate() {
        out[(j, j)] = x;
        out[(n + j, n + j)] = x;
    }
    out
}

/// Matrix trace of a product without forming it.
pub fn trace_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.transpose().iter()).map(|(x, y)| x * y).sum()
}

pub fn is_positive_definite(m: &DMatrix<f64>) -> bool {
    m.clone().cholesky().is_some()
}
