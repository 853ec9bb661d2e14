use nalgebra::DMatrix;
use serde::Serialize;

use super::{
    check_shape, check_square, is_hurwitz, observability_staircase, ordered_schur,
    solve_lyapunov_unchecked, symmetric_extremes, LinalgError, Result,
};

const NEWTON_MAX_ITERS: usize = 60;

/// Output weighting `Θ = diag(I_{p1}, θ I_{p2})` of the observer Riccati equation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OutputWeighting {
    pub p1: usize,
    pub p2: usize,
    pub theta: f64,
}

impl OutputWeighting {
    pub fn matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::identity(self.p1 + self.p2, self.p1 + self.p2);
        for k in self.p1..self.p1 + self.p2 {
            m[(k, k)] = self.theta;
        }
        m
    }

    /// `max{θ, 1}` restricted to the blocks that are present.
    pub fn max_weight(&self) -> f64 {
        match (self.p1 > 0, self.p2 > 0) {
            (true, true) => self.theta.max(1.0),
            (true, false) => 1.0,
            (false, true) => self.theta,
            (false, false) => 0.0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AreSolution {
    #[serde(skip)]
    pub p: DMatrix<f64>,
    pub theta_used: f64,
    pub residual: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

/// Stabilizing solution of `AᵀX + XA − XGX + Q = 0` with `G, Q` symmetric PSD.
///
/// The stable invariant subspace `[U1; U2]` of the Hamiltonian
/// `[[A, −G], [−Q, −Aᵀ]]` is taken from an ordered real Schur form and
/// `X = U2 U1⁻¹`. The result is polished with Newton–Kleinman steps; if the
/// Schur route fails (wrong stable dimension or singular `U1`) the Newton
/// iteration is started from a Bass stabilizing guess instead.
pub fn solve_care(a: &DMatrix<f64>, g: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_square("A", a)?;
    let n = a.nrows();
    check_shape("G", g, n, n)?;
    check_shape("Q", q, n, n)?;
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }

    let seed = match hamiltonian_solution(a, g, q) {
        Some(x) if is_hurwitz(&(a - g * &x)) => x,
        _ => bass_seed(a, g)?,
    };
    newton_kleinman(a, g, q, seed)
}

fn care_residual(a: &DMatrix<f64>, g: &DMatrix<f64>, q: &DMatrix<f64>, x: &DMatrix<f64>) -> f64 {
    (a.transpose() * x + x * a - x * g * x + q).norm()
}

fn hamiltonian_solution(a: &DMatrix<f64>, g: &DMatrix<f64>, q: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    let mut h = DMatrix::<f64>::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(a);
    h.view_mut((0, n), (n, n)).copy_from(&(-g));
    h.view_mut((n, 0), (n, n)).copy_from(&(-q));
    h.view_mut((n, n), (n, n)).copy_from(&(-a.transpose()));

    let (u, _, k) = ordered_schur(&h, |l| l.re < 0.0).ok()?;
    if k != n {
        return None;
    }
    let u1 = u.view((0, 0), (n, n)).into_owned();
    let u2 = u.view((n, 0), (n, n)).into_owned();
    // X U1 = U2  ⇔  U1ᵀ Xᵀ = U2ᵀ
    let lu = u1.transpose().lu();
    let xt = lu.solve(&u2.transpose())?;
    let x = xt.transpose();
    let x = (&x + x.transpose()) * 0.5;
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// `X0 = Z⁻¹` with `(A + βI) Z + Z (A + βI)ᵀ = 2G`, which makes `A − G X0` Hurwitz
/// whenever `(A, G)` is controllable.
fn bass_seed(a: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let beta = a.norm() + 1.0;
    let shifted = a + DMatrix::<f64>::identity(n, n) * beta;
    let z = solve_lyapunov_unchecked(&(-shifted.transpose()), &(g * 2.0))?;
    let x0 = z
        .try_inverse()
        .ok_or(LinalgError::NotStabilizable)?;
    if !is_hurwitz(&(a - g * &x0)) {
        return Err(LinalgError::NotStabilizable);
    }
    Ok(x0)
}

fn newton_kleinman(
    a: &DMatrix<f64>,
    g: &DMatrix<f64>,
    q: &DMatrix<f64>,
    mut x: DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let scale = 1.0 + a.norm() + g.norm() + q.norm();
    let mut best_res = care_residual(a, g, q, &x);
    for _ in 0..NEWTON_MAX_ITERS {
        if best_res <= 1e-13 * scale * (1.0 + x.norm()) {
            break;
        }
        let closed = a - g * &x;
        let rhs = q + &x * g * &x;
        let next = match solve_lyapunov_unchecked(&closed, &rhs) {
            Ok(next) => next,
            Err(_) => break,
        };
        let res = care_residual(a, g, q, &next);
        if !res.is_finite() || res >= best_res {
            break;
        }
        best_res = res;
        x = next;
    }
    if !best_res.is_finite() {
        return Err(LinalgError::SolverDivergence("non-finite residual".into()));
    }
    if !is_hurwitz(&(a - g * &x)) {
        return Err(LinalgError::SolverDivergence(
            "solution is not stabilizing".into(),
        ));
    }
    Ok(x)
}

/// Solves the observer Riccati equation `𝒜𝒫 + 𝒫𝒜ᵀ − 2𝒫𝒞ᵀΘ𝒞𝒫 + I = 0`.
pub fn solve_filter_are(
    acal: &DMatrix<f64>,
    ccal: &DMatrix<f64>,
    weights: &OutputWeighting,
) -> Result<AreSolution> {
    check_square("𝒜", acal)?;
    let n = acal.nrows();
    let p = weights.p1 + weights.p2;
    check_shape("𝒞", ccal, p, n)?;
    if weights.theta <= 0.0 && weights.p2 > 0 {
        return Err(LinalgError::Dimension("θ must be positive".into()));
    }

    let theta = weights.matrix();
    let sqrt_theta = theta.map(f64::sqrt);
    if observability_staircase(acal, &(&sqrt_theta * ccal))?.dim < n {
        return Err(LinalgError::NotObservable);
    }

    let g = ccal.transpose() * &theta * ccal * 2.0;
    let eye = DMatrix::<f64>::identity(n, n);
    let p = solve_care(&acal.transpose(), &g, &eye)?;
    let residual = (acal * &p + &p * acal.transpose() - &p * &g * &p + &eye).norm();
    let (lambda_min, lambda_max) = symmetric_extremes(&p);
    if lambda_min <= 0.0 {
        return Err(LinalgError::SolverDivergence(format!(
            "solution is not positive definite (λ_min = {lambda_min:.3e})"
        )));
    }
    Ok(AreSolution {
        p,
        theta_used: weights.theta,
        residual,
        lambda_min,
        lambda_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shift(p: usize, nbar: usize) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(p * nbar, p * nbar);
        for k in 0..p * (nbar - 1) {
            a[(k, k + p)] = 1.0;
        }
        a
    }

    fn first_block(p: usize, nbar: usize) -> DMatrix<f64> {
        let mut c = DMatrix::zeros(p, p * nbar);
        c.view_mut((0, 0), (p, p)).fill_with_identity();
        c
    }

    #[test]
    fn single_block_closed_form() {
        // −2P² + I = 0
        let w = OutputWeighting { p1: 3, p2: 0, theta: 1.0 };
        let sol = solve_filter_are(&DMatrix::zeros(3, 3), &DMatrix::identity(3, 3), &w).unwrap();
        let expect = DMatrix::<f64>::identity(3, 3) / 2f64.sqrt();
        assert!((sol.p - expect).norm() < 1e-12);
    }

    #[test]
    fn double_integrator_closed_form() {
        let w = OutputWeighting { p1: 0, p2: 1, theta: 0.1 };
        let sol = solve_filter_are(&shift(1, 2), &first_block(1, 2), &w).unwrap();
        // oracle: eliminate the three scalar equations by hand
        let p2 = 1.0 / 0.2f64.sqrt();
        let p1 = ((2.0 * p2 + 1.0) / 0.2).sqrt();
        let p3 = 0.2 * p1 * p2;
        assert!((sol.p[(0, 0)] - p1).abs() < 1e-10);
        assert!((sol.p[(0, 1)] - p2).abs() < 1e-10);
        assert!((sol.p[(1, 0)] - p2).abs() < 1e-10);
        assert!((sol.p[(1, 1)] - p3).abs() < 1e-10);
        assert!((p1 - 5.23073).abs() < 1e-4 && (p3 - 2.33926).abs() < 1e-4);
    }

    #[test]
    fn twelve_dimensional_chain() {
        let w = OutputWeighting { p1: 1, p2: 1, theta: 0.1 };
        let sol = solve_filter_are(&shift(2, 6), &first_block(2, 6), &w).unwrap();
        assert!(sol.residual < 1e-8 * sol.p.norm());
        assert!(sol.lambda_min > 0.0);
        assert_eq!(sol.p, sol.p.transpose());
    }

    #[test]
    fn unobservable_pair_is_rejected() {
        let w = OutputWeighting { p1: 1, p2: 0, theta: 1.0 };
        let c = DMatrix::from_row_slice(1, 2, &[0.0, 1.0]);
        assert!(matches!(
            solve_filter_are(&shift(1, 2), &c, &w),
            Err(LinalgError::NotObservable)
        ));
    }

    #[test]
    fn control_care_for_double_integrator() {
        // AᵀX + XA − XBBᵀX + I = 0 with A = [[0,1],[0,0]], B = [0;1]
        let a = shift(1, 2);
        let b = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let g = &b * b.transpose();
        let x = solve_care(&a, &g, &DMatrix::identity(2, 2)).unwrap();
        // closed form: x12 = 1, x22 = √3, x11 = √3
        let s3 = 3f64.sqrt();
        let expect = DMatrix::from_row_slice(2, 2, &[s3, 1.0, 1.0, s3]);
        assert!((x - expect).norm() < 1e-10);
    }

    #[test]
    fn newton_fallback_from_bass_seed() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, -1.0]);
        let b = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let g = &b * b.transpose();
        let q = DMatrix::identity(2, 2);
        let x0 = bass_seed(&a, &g).unwrap();
        let x = newton_kleinman(&a, &g, &q, x0).unwrap();
        assert!(care_residual(&a, &g, &q, &x) < 1e-10);
        let y = solve_care(&a, &g, &q).unwrap();
        assert!((x - y).norm() < 1e-9);
    }
}
