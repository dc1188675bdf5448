//! Small dense helpers. Symmetric decompositions are backed by faer.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-10;

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::arg(format!("matrix is {}x{}, not square", m.nrows(), m.ncols())));
    }
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL {
                return Err(Error::arg(format!(
                    "matrix is not symmetric at ({i}, {j}): {} vs {}",
                    m[(i, j)],
                    m[(j, i)]
                )));
            }
        }
    }
    Ok(())
}

/// Full decomposition of a real symmetric matrix, eigenvalues ascending and
/// eigenvectors in the matching columns.
pub fn dense_eigh(m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    check_symmetric(m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok((DVector::zeros(0), DMatrix::zeros(0, 0)));
    }
    let eig = to_faer(m)
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::numerical(format!("dense eigensolver failed: {e:?}"), vec![]))?;
    let (u, d) = (eig.U(), eig.S().column_vector());
    let values = DVector::from_fn(n, |i, _| d[i]);
    let vectors = DMatrix::from_fn(n, n, |i, j| u[(i, j)]);
    Ok((values, vectors))
}

/// Eigenvalues only, ascending.
pub fn dense_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_symmetric(m)?;
    if m.nrows() == 0 {
        return Ok(vec![]);
    }
    to_faer(m)
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::numerical(format!("dense eigensolver failed: {e:?}"), vec![]))
}

fn to_faer(m: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) fn scale(alpha: f64, x: &mut [f64]) {
    for xi in x.iter_mut() {
        *xi *= alpha;
    }
}

/// Removes the components of `w` along the orthonormal `basis`.
pub(crate) fn project_out<'a>(w: &mut [f64], basis: impl IntoIterator<Item = &'a [f64]>) {
    for u in basis {
        let c = dot(u, w);
        axpy(-c, u, w);
    }
}

/// In-place modified Gram-Schmidt. Returns false if a vector collapses.
pub(crate) fn orthonormalize(vectors: &mut [Vec<f64>]) -> bool {
    for k in 0..vectors.len() {
        let (done, rest) = vectors.split_at_mut(k);
        let v = &mut rest[0];
        for _ in 0..2 {
            project_out(v, done.iter().map(|u| u.as_slice()));
        }
        let nrm = norm(v);
        if nrm < 1e-8 {
            return false;
        }
        scale(1.0 / nrm, v);
    }
    true
}
