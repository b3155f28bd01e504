//! Dense complex linear-algebra helpers shared by the network and channel
//! modules: LU solves with condition estimates and the Hermitian square root
//! used by the covariance sampler.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{CMatrix, Error, Result};

/// Condition number estimate from the singular values.
pub(crate) fn condition(a: &CMatrix) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Solve A X = B by LU with partial pivoting; returns the solution and the
/// SVD condition estimate of A. Singular systems name the offending block.
pub(crate) fn solve_square(
    a: &CMatrix,
    b: &CMatrix,
    block: &'static str,
) -> Result<(CMatrix, f64)> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{block}: matrix is {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{block}: rhs has {} rows for a {}x{} matrix",
            b.nrows(),
            a.nrows(),
            a.ncols()
        )));
    }
    if a.nrows() == 0 {
        return Ok((CMatrix::zeros(0, b.ncols()), 1.0));
    }
    let cond = condition(a);
    let lu = a.clone().lu();
    match lu.solve(b) {
        Some(x) if x.iter().all(|v| v.re.is_finite() && v.im.is_finite()) => Ok((x, cond)),
        _ => Err(Error::SingularBlock { block, condition: cond }),
    }
}

/// Hermitian (PSD) square root via eigendecomposition. Eigenvalues in
/// [-tol·λ_max, 0) are clipped to zero; anything more negative is an error.
pub(crate) fn hermitian_sqrt(a: &CMatrix, tol: f64) -> Result<CMatrix> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "hermitian_sqrt: matrix is {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.nrows() == 0 {
        return Ok(a.clone());
    }
    let eig = nalgebra::SymmetricEigen::new(a.clone());
    let max_eig = eig.eigenvalues.iter().fold(0.0f64, |acc, &v| acc.max(v));
    let floor = -tol * max_eig.max(f64::MIN_POSITIVE);
    let mut roots = eig.eigenvalues.clone();
    for v in roots.iter_mut() {
        if *v < floor {
            return Err(Error::NotPositiveSemidefinite {
                min_eig: *v,
                max_eig,
            });
        }
        *v = v.max(0.0).sqrt();
    }
    let d = DMatrix::from_diagonal(&roots.map(|v| Complex64::new(v, 0.0)));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    #[test]
    fn solve_recovers_known_solution() {
        let a = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(2.0, 1.0),
                Complex64::new(0.5, 0.0),
                Complex64::new(-1.0, 0.3),
                Complex64::new(3.0, -2.0),
            ],
        );
        let x_true = CMatrix::from_row_slice(2, 1, &[Complex64::new(1.0, -1.0), Complex64::new(0.2, 2.0)]);
        let b = &a * &x_true;
        let (x, cond) = solve_square(&a, &b, "test").unwrap();
        assert!((x - x_true).norm() < 1e-13);
        assert!(cond > 1.0 && cond < 1e3);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(2.0, 0.0),
                Complex64::new(2.0, 0.0),
                Complex64::new(4.0, 0.0),
            ],
        );
        let b = CMatrix::identity(2, 2);
        let err = solve_square(&a, &b, "test-block").unwrap_err();
        assert!(matches!(err, Error::SingularBlock { block: "test-block", .. }));
    }

    #[test]
    fn hermitian_sqrt_squares_back() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(4.0, 0.0),
                Complex64::new(1.0, 1.0),
                Complex64::new(1.0, -1.0),
                Complex64::new(3.0, 0.0),
            ],
        );
        let s = hermitian_sqrt(&m, 1e-9).unwrap();
        let back = &s * &s;
        assert!((back - m).norm() < 1e-12);
    }

    #[test]
    fn hermitian_sqrt_handles_rank_deficiency() {
        // Rank-1 PSD matrix v v^H.
        let v = DVector::from_vec(vec![Complex64::new(1.0, 0.5), Complex64::new(-0.3, 1.1)]);
        let m = &v * v.adjoint();
        let s = hermitian_sqrt(&m, 1e-9).unwrap();
        assert!(((&s * &s) - m).norm() < 1e-12);
    }

    #[test]
    fn clearly_indefinite_matrix_rejected() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(-1.0, 0.0),
            ],
        );
        assert!(matches!(
            hermitian_sqrt(&m, 1e-9),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn zero_size_solve_is_identity() {
        let a = CMatrix::zeros(0, 0);
        let b = CMatrix::zeros(0, 3);
        let (x, cond) = solve_square(&a, &b, "empty").unwrap();
        assert_eq!(x.nrows(), 0);
        assert_eq!(x.ncols(), 3);
        assert_relative_eq!(cond, 1.0);
    }
}
