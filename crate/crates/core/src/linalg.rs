//! Thin wrappers over the dense solvers used throughout the crate.
//!
//! Matrices cross this boundary as row-major `&[f64]` slices so callers never
//! depend on the backing library's layout.

use faer::linalg::solvers::Solve;
use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};

/// Symmetric eigendecomposition with eigenvalues sorted in descending order.
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: Mat<f64>,
}

pub(crate) fn view(entries: &[f64], n: usize) -> MatRef<'_, f64> {
    MatRef::from_row_major_slice(entries, n, n)
}

pub fn symmetric_eigen(entries: &[f64], n: usize) -> Result<SymmetricEigen> {
    assert_eq!(entries.len(), n * n);
    let evd = view(entries, n)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::EigenNonConvergence)?;
    let s = evd.S().column_vector();
    let u = evd.U();
    // faer returns ascending order
    let values: Vec<f64> = (0..n).rev().map(|k| s[k]).collect();
    let vectors = Mat::from_fn(n, n, |i, k| u[(i, n - 1 - k)]);
    Ok(SymmetricEigen { values, vectors })
}

pub fn symmetric_eigenvalues(entries: &[f64], n: usize) -> Result<Vec<f64>> {
    assert_eq!(entries.len(), n * n);
    let mut values = view(entries, n)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::EigenNonConvergence)?;
    values.reverse();
    Ok(values)
}

/// Solves `(A + shift·I) x = b` by Cholesky with a few steps of iterative
/// refinement. On failure the smallest LDLᵀ pivot is reported.
pub fn spd_solve(entries: &[f64], n: usize, shift: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    assert_eq!(entries.len(), n * n);
    assert_eq!(rhs.len(), n);
    let a = Mat::from_fn(n, n, |i, j| {
        entries[i * n + j] + if i == j { shift } else { 0.0 }
    });
    let llt = match a.llt(Side::Lower) {
        Ok(f) => f,
        Err(_) => return Err(smallest_pivot(&a)),
    };

    let b = Mat::from_fn(n, 1, |i, _| rhs[i]);
    let mut x = llt.solve(&b);
    let mut best_norm = residual(&a, &x, &b).norm_l2();
    for _ in 0..4 {
        let r = residual(&a, &x, &b);
        let dx = llt.solve(&r);
        let candidate = &x + &dx;
        let norm = residual(&a, &candidate, &b).norm_l2();
        if !(norm < best_norm) {
            break;
        }
        best_norm = norm;
        x = candidate;
    }
    Ok((0..n).map(|i| x[(i, 0)]).collect())
}

fn residual(a: &Mat<f64>, x: &Mat<f64>, b: &Mat<f64>) -> Mat<f64> {
    b - a * x
}

fn smallest_pivot(a: &Mat<f64>) -> Error {
    match a.ldlt(Side::Lower) {
        Ok(f) => {
            let d = f.D().column_vector();
            let (index, pivot) = (0..d.nrows())
                .map(|i| (i, d[i]))
                .fold((0, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
            Error::Factorization { index, pivot }
        }
        Err(faer::linalg::cholesky::ldlt::factor::LdltError::ZeroPivot { index }) => {
            Error::Factorization { index, pivot: 0.0 }
        }
    }
}
