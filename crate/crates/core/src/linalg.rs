//! Dense symmetric solves with ridge repair.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

/// Cholesky factor of `m`, retrying with `m + ridge * I` for each ridge in
/// turn. Returns the factor, the ridge that succeeded (0 for none) and the
/// repaired matrix.
pub(crate) fn factor_with_ridge(
    m: &DMatrix<f64>,
    ridges: impl IntoIterator<Item = f64>,
) -> Option<(Cholesky<f64, Dyn>, f64, DMatrix<f64>)> {
    if let Some(chol) = m.clone().cholesky() {
        return Some((chol, 0.0, m.clone()));
    }
    for ridge in ridges {
        if !(ridge > 0.0) {
            continue;
        }
        let repaired = m + DMatrix::identity(m.nrows(), m.ncols()) * ridge;
        if let Some(chol) = repaired.clone().cholesky() {
            return Some((chol, ridge, repaired));
        }
    }
    None
}

/// Ratio of extreme eigenvalue magnitudes, for error diagnostics.
pub(crate) fn condition_estimate(m: &DMatrix<f64>) -> f64 {
    let eig = m.clone().symmetric_eigen();
    let abs: Vec<f64> = eig.eigenvalues.iter().map(|v| v.abs()).collect();
    let max = abs.iter().cloned().fold(0.0, f64::max);
    let min = abs.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

pub(crate) fn quadratic_form(m: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    v.dot(&(m * v))
}

/// Nearest symmetric matrix with every eigenvalue at least `floor`.
pub(crate) fn clip_eigenvalues(m: &DMatrix<f64>, floor: f64) -> DMatrix<f64> {
    let eig = m.clone().symmetric_eigen();
    let clipped = eig.eigenvalues.map(|v| v.max(floor));
    let q = &eig.eigenvectors;
    let out = q * DMatrix::from_diagonal(&clipped) * q.transpose();
    // restore exact symmetry lost to round-off
    (&out + out.transpose()) * 0.5
}
