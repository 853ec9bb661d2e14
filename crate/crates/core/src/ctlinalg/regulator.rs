use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{check_shape, check_square, LinalgError, Result, RANK_RTOL};

/// Solution `(Π, Γ)` of `ΠE = AΠ + R + BΓ`, `0 = DΠ + Dm`.
#[derive(Clone, Debug, Serialize)]
pub struct RegulatorSolution {
    #[serde(skip)]
    pub pi: DMatrix<f64>,
    #[serde(skip)]
    pub gamma: DMatrix<f64>,
    /// `‖ΠE − AΠ − R − BΓ‖_F`
    pub residual_dyn: f64,
    /// `‖DΠ + Dm‖_F`
    pub residual_out: f64,
}

/// Minimum-norm solution of the vectorized regulator equations.
///
/// Unknowns are stacked as `[vec Π; vec Γ]` (column-major), the system
///
/// ```text
/// (Eᵀ ⊗ I − I ⊗ A) vec Π − (I ⊗ B) vec Γ = vec R
/// (I ⊗ D) vec Π                          = −vec Dm
/// ```
///
/// is solved by truncated SVD. A least-squares residual above
/// `1e-8 · (1 + ‖inputs‖)` means the equations have no solution, which happens
/// when a plant zero resonates with an exosystem mode or `(A, B, D)` is not
/// right-invertible.
pub fn solve_regulator(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    r: &DMatrix<f64>,
    e: &DMatrix<f64>,
    d: &DMatrix<f64>,
    dm: &DMatrix<f64>,
) -> Result<RegulatorSolution> {
    check_square("A", a)?;
    check_square("E", e)?;
    let nx = a.nrows();
    let ne = e.nrows();
    let m = b.ncols();
    let p = d.nrows();
    check_shape("B", b, nx, m)?;
    check_shape("R", r, nx, ne)?;
    check_shape("D", d, p, nx)?;
    check_shape("Dm", dm, p, ne)?;

    if ne == 0 {
        return Ok(RegulatorSolution {
            pi: DMatrix::zeros(nx, 0),
            gamma: DMatrix::zeros(m, 0),
            residual_dyn: 0.0,
            residual_out: 0.0,
        });
    }

    let n_pi = nx * ne;
    let n_gamma = m * ne;
    let rows = nx * ne + p * ne;
    let mut big = DMatrix::<f64>::zeros(rows, n_pi + n_gamma);

    let eye_x = DMatrix::<f64>::identity(nx, nx);
    let eye_e = DMatrix::<f64>::identity(ne, ne);
    let sylv = e.transpose().kronecker(&eye_x) - eye_e.kronecker(a);
    big.view_mut((0, 0), (nx * ne, n_pi)).copy_from(&sylv);
    big.view_mut((0, n_pi), (nx * ne, n_gamma))
        .copy_from(&(-eye_e.kronecker(b)));
    big.view_mut((nx * ne, 0), (p * ne, n_pi))
        .copy_from(&eye_e.kronecker(d));

    let mut rhs = DVector::<f64>::zeros(rows);
    rhs.rows_mut(0, nx * ne).copy_from_slice(r.as_slice());
    for (k, v) in dm.iter().enumerate() {
        rhs[nx * ne + k] = -v;
    }

    let svd = big.svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let sol = svd
        .solve(&rhs, RANK_RTOL * smax.max(f64::MIN_POSITIVE))
        .map_err(|msg| LinalgError::Singular(msg.to_string()))?;

    let pi = DMatrix::from_column_slice(nx, ne, &sol.as_slice()[..n_pi]);
    let gamma = DMatrix::from_column_slice(m, ne, &sol.as_slice()[n_pi..]);
    let residual_dyn = (&pi * e - a * &pi - r - b * &gamma).norm();
    let residual_out = (d * &pi + dm).norm();

    let scale = 1.0 + a.norm() + b.norm() + r.norm() + e.norm() + d.norm() + dm.norm();
    let limit = 1e-8 * scale;
    let residual = residual_dyn.hypot(residual_out);
    if residual > limit {
        return Err(LinalgError::Unsolvable { residual, limit });
    }
    Ok(RegulatorSolution {
        pi,
        gamma,
        residual_dyn,
        residual_out,
    })
}

/// Residuals of a candidate `(Π, Γ)`; used to check externally supplied pairs.
#[allow(clippy::too_many_arguments)]
pub fn regulator_residuals(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    r: &DMatrix<f64>,
    e: &DMatrix<f64>,
    d: &DMatrix<f64>,
    dm: &DMatrix<f64>,
    pi: &DMatrix<f64>,
    gamma: &DMatrix<f64>,
) -> (f64, f64) {
    (
        (pi * e - a * pi - r - b * gamma).norm(),
        (d * pi + dm).norm(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(r: usize, c: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(r, c, v)
    }

    #[test]
    fn damped_agent_against_harmonic_leader_is_identity() {
        let a = m(2, 2, &[0.0, 1.0, -2.0, -2.0]);
        let b = m(2, 1, &[0.0, 1.0]);
        let d = m(1, 2, &[1.0, 0.0]);
        let a0 = m(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let d0 = m(1, 2, &[-1.0, 0.0]);
        let sol = solve_regulator(&a, &b, &DMatrix::zeros(2, 2), &a0, &d, &d0).unwrap();
        assert!((&sol.pi - DMatrix::<f64>::identity(2, 2)).norm() < 1e-8);
        assert!((&sol.gamma - m(1, 2, &[1.0, 2.0])).norm() < 1e-8);
    }

    #[test]
    fn scalar_integrator_against_constant() {
        let one = m(1, 1, &[1.0]);
        let zero = m(1, 1, &[0.0]);
        let sol = solve_regulator(&zero, &one, &zero, &zero, &one, &m(1, 1, &[-1.0])).unwrap();
        assert!((sol.pi[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(sol.gamma[(0, 0)].abs() < 1e-12);
    }

    #[test]
    fn resonant_zero_is_unsolvable() {
        // plant zero at s = 1 meets an exosystem mode at s = 1
        let a = m(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let b = m(2, 1, &[0.0, 1.0]);
        let d = m(1, 2, &[-1.0, 1.0]);
        let e = m(1, 1, &[1.0]);
        let err = solve_regulator(&a, &b, &DMatrix::zeros(2, 1), &e, &d, &m(1, 1, &[1.0]));
        assert!(matches!(err, Err(LinalgError::Unsolvable { .. })));
    }

    #[test]
    fn empty_exosystem() {
        let a = m(1, 1, &[0.0]);
        let sol = solve_regulator(
            &a,
            &a,
            &DMatrix::zeros(1, 0),
            &DMatrix::zeros(0, 0),
            &a,
            &DMatrix::zeros(1, 0),
        )
        .unwrap();
        assert_eq!(sol.pi.shape(), (1, 0));
    }
}
