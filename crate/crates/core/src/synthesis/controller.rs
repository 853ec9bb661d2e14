use nalgebra::DMatrix;
use serde::Serialize;

use super::{AgentModel, GroupExosystem, Mode, ReducedModel, Result, SynthesisError};
use crate::ctlinalg::{hstack, solve_care, solve_regulator, spectral_abscissa, RegulatorSolution};

/// Controller `u = F x̂ + Σ_j (Γ_j − F Π_j) ŵ_j` acting on recovered estimates.
///
/// In UNIFIED mode there is one regulator block and the estimate is
/// `x̄̂ = [x̂; x̄̂_2]` in reduced coordinates. In the case modes there are two
/// blocks, for the individual exosystem `ω` and the group exosystem `x_0`, and
/// the estimate is `[x̂; ω̂; x̂_0]` in original coordinates.
#[derive(Clone, Debug, Serialize)]
pub struct ControllerSpec {
    pub mode: Mode,
    #[serde(skip)]
    pub f: DMatrix<f64>,
    pub regulators: Vec<RegulatorSolution>,
    #[serde(skip)]
    pub composite: Vec<DMatrix<f64>>,
}

impl ControllerSpec {
    /// `[F, Γ_1 − FΠ_1, …]`, the map from the stacked estimate to `u`.
    pub fn estimate_gain(&self) -> DMatrix<f64> {
        let mut blocks = vec![&self.f];
        blocks.extend(self.composite.iter());
        hstack(&blocks)
    }
}

fn check_hurwitz(m: &DMatrix<f64>, what: impl FnOnce() -> String) -> Result<()> {
    let abscissa = spectral_abscissa(m);
    if abscissa >= 0.0 {
        return Err(SynthesisError::NotHurwitz {
            what: what(),
            abscissa,
        });
    }
    Ok(())
}

/// Stabilizing state feedback `F = −BᵀX` from `AᵀX + XA − XBBᵀX + I = 0`.
pub fn synthesize_feedback(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let x = solve_care(a, &(b * b.transpose()), &DMatrix::identity(n, n))?;
    Ok(-(b.transpose() * x))
}

/// Output injection `K = −YCᵀ` with `A + KC` Hurwitz, from the dual Riccati
/// equation `AY + YAᵀ − YCᵀCY + I = 0`.
pub fn synthesize_injection(a: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, c.nrows()));
    }
    let y = solve_care(&a.transpose(), &(c.transpose() * c), &DMatrix::identity(n, n))?;
    Ok(-(y * c.transpose()))
}

/// Solves the regulator equations for one agent and forms its controller.
///
/// `agent_index` is 1-based and only used in error messages.
pub fn build_controller(
    agent: &AgentModel,
    group: &GroupExosystem,
    reduced: &ReducedModel,
    f: &DMatrix<f64>,
    agent_index: usize,
) -> Result<ControllerSpec> {
    let (n, m) = (agent.n(), agent.m());
    if f.shape() != (m, n) {
        return Err(SynthesisError::Dimension(format!(
            "agent {agent_index}: F must be {m}x{n}, got {}x{}",
            f.nrows(),
            f.ncols()
        )));
    }
    check_hurwitz(&(&agent.a + &agent.b * f), || format!("agent {agent_index}: A + BF"))?;

    let reg = |r: &DMatrix<f64>, e: &DMatrix<f64>, dm: &DMatrix<f64>| {
        solve_regulator(&agent.a, &agent.b, r, e, &agent.d_s, dm).map_err(|source| {
            SynthesisError::Regulator {
                agent: agent_index,
                source,
            }
        })
    };
    let regulators = match reduced.mode {
        Mode::Unified => vec![reg(&reduced.a12(), &reduced.a22(), &reduced.dm_reduced)?],
        Mode::Case1 | Mode::Case2 => vec![
            reg(&DMatrix::zeros(n, agent.q()), &agent.s, &agent.d_w)?,
            reg(&DMatrix::zeros(n, group.n0()), &group.a0, &group.d0)?,
        ],
    };
    let composite = regulators.iter().map(|r| &r.gamma - f * &r.pi).collect();
    Ok(ControllerSpec {
        mode: reduced.mode,
        f: f.clone(),
        regulators,
        composite,
    })
}

/// Checks that a user-supplied injection gain stabilizes `A + KC`.
pub(crate) fn check_injection(
    a: &DMatrix<f64>,
    k: &DMatrix<f64>,
    c: &DMatrix<f64>,
    what: impl FnOnce() -> String,
) -> Result<()> {
    if k.shape() != (a.nrows(), c.nrows()) {
        return Err(SynthesisError::Dimension(format!(
            "{}: gain must be {}x{}, got {}x{}",
            what(),
            a.nrows(),
            c.nrows(),
            k.nrows(),
            k.ncols()
        )));
    }
    if a.nrows() == 0 {
        return Ok(());
    }
    check_hurwitz(&(a + k * c), what)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctlinalg::is_hurwitz;

    fn m(r: usize, c: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(r, c, v)
    }

    #[test]
    fn double_integrator_feedback_and_injection() {
        let a = m(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let b = m(2, 1, &[0.0, 1.0]);
        let c = m(1, 2, &[1.0, 0.0]);
        let f = synthesize_feedback(&a, &b).unwrap();
        // X = [[√3, 1], [1, √3]]
        assert!((f - m(1, 2, &[-1.0, -(3.0_f64).sqrt()])).norm() < 1e-10);
        let k = synthesize_injection(&a, &c).unwrap();
        assert!(is_hurwitz(&(&a + &k * &c)));
    }

    #[test]
    fn empty_injection() {
        let k = synthesize_injection(&DMatrix::zeros(0, 0), &DMatrix::zeros(1, 0)).unwrap();
        assert_eq!(k.shape(), (0, 1));
    }

    #[test]
    fn printed_gain_of_second_agent_case_controller() {
        // Γ2 − F2Π2 for the two-state agent with A0 the harmonic oscillator
        let f = m(1, 2, &[-2.0, -6.0]);
        let pi = m(2, 3, &[0.0, 0.4, -0.2, 1.0, 0.6, 0.2]);
        let gamma = m(1, 3, &[0.0, -0.2, 0.6]);
        let g = gamma - &f * pi;
        assert!((g - m(1, 3, &[6.0, 4.2, 1.4])).norm() < 1e-12);
    }
}
