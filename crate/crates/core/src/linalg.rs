//! Dense helpers on top of `nalgebra`: leading eigenpairs of a symmetric
//! matrix and row-major (de)serialization.

use alloc::vec::Vec;
use core::cmp::Ordering;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

use crate::{rng, Error, Result};

/// Below this size the full decomposition is cheaper than subspace iteration.
const FULL_DECOMPOSITION_MAX: usize = 96;
const OVERSAMPLE: usize = 8;
const MAX_SUBSPACE_ITERATIONS: usize = 5000;
const RITZ_TOLERANCE: f64 = 1e-11;

/// Symmetry check with an absolute tolerance relative to the largest entry.
pub fn is_symmetric(m: &DMatrix<f64>, rel_tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    (0..m.nrows()).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= rel_tol * scale))
}

/// Order by magnitude descending, then value descending, then index.
fn magnitude_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        let (x, y) = (values[a], values[b]);
        y.abs()
            .partial_cmp(&x.abs())
            .unwrap_or(Ordering::Equal)
            .then(y.partial_cmp(&x).unwrap_or(Ordering::Equal))
            .then(a.cmp(&b))
    });
    idx
}

/// Full symmetric decomposition, sorted by `|λ|` descending.
pub fn sorted_symmetric_eigen(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0).ok_or(Error::EigenFailure)?;
    let order = magnitude_order(eig.eigenvalues.as_slice());
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// The `k` eigenpairs of largest magnitude of a symmetric matrix.
///
/// Small matrices are decomposed fully. Larger ones use block subspace
/// iteration with Rayleigh–Ritz extraction, oversampled by a few columns;
/// the iteration stops once every requested Ritz pair has residual
/// `‖A x − θ x‖ ≤ 1e-11·|θ₁|`. A low-rank `Ω` converges in one or two sweeps.
///
/// Returns the eigenvalues and an `n × k` matrix of unit eigenvectors.
pub fn leading_eigenpairs(m: &DMatrix<f64>, k: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch(alloc::format!("expected a square matrix, got {}x{}", n, m.ncols())));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidInput(alloc::format!("cannot extract {k} eigenpairs from n = {n}")));
    }
    if n <= FULL_DECOMPOSITION_MAX {
        let (values, vectors) = sorted_symmetric_eigen(m)?;
        return Ok((values[..k].to_vec(), vectors.columns(0, k).into_owned()));
    }

    let block = (k + OVERSAMPLE).min(n);
    let mut rng = rng::stream(0x5EED, &[n as u64, k as u64]);
    let start = DMatrix::from_fn(n, block, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let mut basis = start.qr().q();

    for _ in 0..MAX_SUBSPACE_ITERATIONS {
        let image = m * &basis;
        let projected = basis.transpose() * &image;
        let projected = (&projected + projected.transpose()) * 0.5;
        let (ritz, coeffs) = sorted_symmetric_eigen(&projected)?;
        let scale = ritz[0].abs().max(f64::MIN_POSITIVE);

        let vectors = &basis * coeffs.columns(0, k);
        let images = &image * coeffs.columns(0, k);
        let converged = (0..k).all(|j| {
            let r: DVector<f64> = images.column(j) - vectors.column(j) * ritz[j];
            r.norm() <= RITZ_TOLERANCE * scale
        });
        if converged || scale == f64::MIN_POSITIVE {
            return Ok((ritz[..k].to_vec(), vectors));
        }
        basis = image.qr().q();
    }
    Err(Error::EigenFailure)
}

/// `serde` adaptor writing a matrix as a list of rows.
pub mod serde_rows {
    use alloc::vec::Vec;

    use nalgebra::DMatrix;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
        m.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Option<DMatrix<f64>> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return None;
        }
        Some(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
    }

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        from_rows(&rows).ok_or_else(|| D::Error::custom("rows have unequal lengths"))
    }
}
