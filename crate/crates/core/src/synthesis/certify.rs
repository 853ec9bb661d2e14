use nalgebra::DMatrix;
use serde::Serialize;

use super::{CanonicalModel, Result, SynthesisError};
use crate::ctlinalg::{solve_lyapunov, symmetric_extremes, AreSolution, OutputWeighting};
use crate::graphs::{Kappa, SwitchReport, TopologySet};

/// Extreme eigenvalues of one topology certificate `P_k`.
#[derive(Clone, Debug, Serialize)]
pub struct CertificateSpectrum {
    pub k: usize,
    pub connected: bool,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

/// Dwell-time / high-gain certification of a switched design.
#[derive(Clone, Debug, Serialize)]
pub struct CertificationReport {
    pub lambda_c: f64,
    pub lambda_d: f64,
    pub a: f64,
    pub kappa_star: f64,
    pub eps_star: f64,
    pub c_star: f64,
    pub alpha: f64,
    /// Weight `m` in `κ* = (α + 4 m λ_max²(𝒫)) / (1 − α)`.
    pub weight: f64,
    pub lambda_min_p: f64,
    pub lambda_max_p: f64,
    /// Admissibility bound on `‖ℒ_ε‖`.
    #[serde(rename = "norm_bound_Leps")]
    pub norm_bound_leps: f64,
    /// `‖ℒ_ε‖` at the design `ε`.
    #[serde(rename = "norm_Leps")]
    pub norm_leps: f64,
    /// Largest `ε ∈ (0, 1]` meeting the `‖ℒ_ε‖` bound.
    pub eps_norm: f64,
    pub rho_bound: String,
    pub tau_d: f64,
    pub kappa_achieved: Kappa,
    pub t_bar0: f64,
    pub kappa_ok: bool,
    pub epsilon: f64,
    pub epsilon_ok: bool,
    #[serde(rename = "P_k_spectra")]
    pub p_k_spectra: Vec<CertificateSpectrum>,
}

impl CertificationReport {
    /// Both the dwell-time ratio and the gain parameter meet their bounds.
    pub fn certified(&self) -> bool {
        self.kappa_ok && self.epsilon_ok
    }
}

/// `P_k` with `(−L_k + β_k I)ᵀ P_k + P_k (−L_k + β_k I) = −I` for rooted graphs;
/// `I` for a disconnected graph whose Laplacian is zero or has a positive
/// semidefinite symmetric part.
pub fn topology_lyapunov_certificates(set: &TopologySet) -> Result<Vec<DMatrix<f64>>> {
    let n = set.n();
    let eye = DMatrix::<f64>::identity(n, n);
    (1..=set.len())
        .map(|k| {
            let l = set.laplacian(k);
            match set.beta_of(k) {
                Some(beta) => Ok(solve_lyapunov(&(&eye * beta - l), &eye)?),
                None => {
                    let sym = l + l.transpose();
                    if l.iter().all(|v| *v == 0.0) || symmetric_extremes(&sym).0 >= -1e-12 {
                        Ok(eye.clone())
                    } else {
                        Err(SynthesisError::CertificateUnavailable { k })
                    }
                }
            }
        })
        .collect()
}

/// `κ* = (α + 4 m λ_max²(𝒫)) / (1 − α)`.
pub fn kappa_star(alpha: f64, weight: f64, lambda_max_p: f64) -> f64 {
    (alpha + 4.0 * weight * lambda_max_p * lambda_max_p) / (1.0 - alpha)
}

/// `ε* = min(1, α τ_d / (2 λ_max(𝒫) ln a))`, or 1 when `ln a ≤ 0`.
pub fn epsilon_star(alpha: f64, tau_d: f64, lambda_max_p: f64, a: f64) -> f64 {
    let ln_a = a.ln();
    if ln_a <= 0.0 || !tau_d.is_finite() {
        return 1.0;
    }
    (alpha * tau_d / (2.0 * lambda_max_p * ln_a)).min(1.0)
}

/// `‖ℒ_ε‖ = max_i ‖ε^{n̄+1} L_i S(ε)‖₂`.
pub fn scaled_coupling_norm(models: &[&CanonicalModel], eps: f64) -> f64 {
    models
        .iter()
        .map(|m| {
            let s = m.scaled_coupling(eps);
            if s.is_empty() {
                0.0
            } else {
                s.singular_values().max()
            }
        })
        .fold(0.0, f64::max)
}

/// Evaluates every certification quantity for the given design.
#[allow(clippy::too_many_arguments)]
pub fn certify_high_gain(
    are: &AreSolution,
    weights: &OutputWeighting,
    certificates: &[DMatrix<f64>],
    set: &TopologySet,
    switching: &SwitchReport,
    models: &[&CanonicalModel],
    alpha: f64,
    epsilon: f64,
) -> Result<CertificationReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(SynthesisError::AlphaRange(alpha));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(SynthesisError::EpsilonRange(epsilon));
    }
    let (pmin, pmax) = (are.lambda_min, are.lambda_max);
    let weight = weights.max_weight();

    let spectra: Vec<CertificateSpectrum> = certificates
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let (lo, hi) = symmetric_extremes(p);
            CertificateSpectrum {
                k: i + 1,
                connected: set.is_connected(i + 1),
                lambda_min: lo,
                lambda_max: hi,
            }
        })
        .collect();
    let max_hi = spectra.iter().map(|s| s.lambda_max).fold(0.0, f64::max);
    let min_lo = spectra.iter().map(|s| s.lambda_min).fold(f64::INFINITY, f64::min);

    let a = (pmax / pmin) * (max_hi / min_lo);
    let kappa = kappa_star(alpha, weight, pmax);
    let eps_star = epsilon_star(alpha, switching.tau_d, pmax, a);
    let c_star = (pmax * max_hi / (pmin * min_lo)).sqrt();
    let bound = spectra
        .iter()
        .map(|s| s.lambda_min * pmin / (4.0 * s.lambda_max * pmax * pmax))
        .fold(f64::INFINITY, f64::min);

    let norm_at = |e: f64| scaled_coupling_norm(models, e);
    let eps_norm = if norm_at(1.0) < bound {
        1.0
    } else {
        // ‖ℒ_ε‖ is nondecreasing in ε: bisect for the admissible edge
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if norm_at(mid) < bound {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let norm_leps = norm_at(epsilon);

    Ok(CertificationReport {
        lambda_c: 1.0 / (2.0 * pmax),
        lambda_d: 2.0 * weight * pmax,
        a,
        kappa_star: kappa,
        eps_star,
        c_star,
        alpha,
        weight,
        lambda_min_p: pmin,
        lambda_max_p: pmax,
        norm_bound_leps: bound,
        norm_leps,
        eps_norm,
        rho_bound: format!(
            "number of switches on [t̄0, t) is at most (t − t̄0)/τ_d with τ_d = {}",
            switching.tau_d
        ),
        tau_d: switching.tau_d,
        kappa_achieved: switching.kappa_achieved,
        t_bar0: switching.t_bar0,
        kappa_ok: switching.kappa_achieved.at_least(kappa),
        epsilon,
        epsilon_ok: epsilon <= eps_star && norm_leps < bound,
        p_k_spectra: spectra,
    })
}
