use nalgebra::{DMatrix, DVector};

use super::{check_shape, check_square, spectral_abscissa, LinalgError, Result};

/// Solves `MᵀP + PM = -Q` for Hurwitz `M`. The result is symmetrized.
pub fn solve_lyapunov(m: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_square("M", m)?;
    check_shape("Q", q, m.nrows(), m.nrows())?;
    let abscissa = spectral_abscissa(m);
    if abscissa >= 0.0 {
        return Err(LinalgError::NotHurwitz { abscissa });
    }
    solve_lyapunov_unchecked(m, q)
}

/// Kronecker-product solve of `MᵀP + PM = -Q` without the Hurwitz precheck.
/// Fails only when `M` and `-M` share an eigenvalue.
pub fn solve_lyapunov_unchecked(m: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let eye = DMatrix::<f64>::identity(n, n);
    let mt = m.transpose();
    // column-major vec: vec(MᵀP) = (I ⊗ Mᵀ) vec P, vec(PM) = (Mᵀ ⊗ I) vec P
    let k = eye.kronecker(&mt) + mt.kronecker(&eye);
    let rhs = DVector::from_iterator(n * n, q.iter().map(|v| -v));
    let sol = k
        .lu()
        .solve(&rhs)
        .ok_or_else(|| LinalgError::Singular("Lyapunov operator is singular".into()))?;
    let p = DMatrix::from_column_slice(n, n, sol.as_slice());
    Ok((&p + p.transpose()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(m: &DMatrix<f64>, q: &DMatrix<f64>, p: &DMatrix<f64>) -> f64 {
        (m.transpose() * p + p * m + q).norm()
    }

    #[test]
    fn scalar_case() {
        let p = solve_lyapunov(&DMatrix::from_element(1, 1, -1.0), &DMatrix::from_element(1, 1, 1.0))
            .unwrap();
        assert!((p[(0, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn negative_identity() {
        let m = -DMatrix::<f64>::identity(2, 2);
        let p = solve_lyapunov(&m, &DMatrix::identity(2, 2)).unwrap();
        assert!((p - DMatrix::identity(2, 2) * 0.5).norm() < 1e-15);
    }

    #[test]
    fn shifted_chain_laplacian() {
        // L3 of the third leader-follower graph (a chain rooted at the leader)
        let l3 = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0, -1.0, 1.0]);
        let m = -(l3 - DMatrix::identity(3, 3) * 0.5);
        let q = DMatrix::identity(3, 3);
        let p = solve_lyapunov(&m, &q).unwrap();
        assert!(residual(&m, &q, &p) < 1e-10);
        assert!(p.clone().symmetric_eigen().eigenvalues.min() > 0.0);
    }

    #[test]
    fn refuses_unstable_matrix() {
        let m = DMatrix::from_element(1, 1, 0.5);
        assert!(matches!(
            solve_lyapunov(&m, &DMatrix::identity(1, 1)),
            Err(LinalgError::NotHurwitz { .. })
        ));
    }
}
