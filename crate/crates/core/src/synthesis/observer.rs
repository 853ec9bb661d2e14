use nalgebra::DMatrix;

use super::controller::check_injection;
use super::{
    chain_output, pseudo_identical_form, scaling_matrix, shift_matrix, AgentModel, CanonicalModel,
    GroupExosystem, Mode, ReducedModel, Result, SynthesisError,
};
use crate::ctlinalg::{block_diag, solve_filter_are, AreSolution, OutputWeighting};

/// Per-agent observer data.
///
/// `recovery` maps the observer state `η_i` to the estimate consumed by the
/// controller (see [`super::ControllerSpec`]).
#[derive(Clone, Debug)]
pub struct AgentObserver {
    /// Canonical form of the distributed high-gain observer (UNIFIED, CASE2).
    pub canonical: Option<CanonicalModel>,
    /// Local Luenberger gain for `(x_i, ω_i)` (CASE1).
    pub k_a: Option<DMatrix<f64>>,
    /// Local gain for the cascaded `ω_i` observer (CASE2).
    pub k_s: Option<DMatrix<f64>>,
    pub recovery: DMatrix<f64>,
    pub state_dim: usize,
}

/// Distributed observer design shared by all agents.
#[derive(Clone, Debug)]
pub struct ObserverSpec {
    pub mode: Mode,
    pub epsilon: f64,
    pub nbar: usize,
    /// Chain width `p` of the high-gain observer.
    pub p: usize,
    /// Leading rows of the chain fed by local measurements (UNIFIED only).
    pub p1: usize,
    pub weights: OutputWeighting,
    pub are: AreSolution,
    /// `S(ε) 𝒫 𝒞ᵀ`.
    pub gain: DMatrix<f64>,
    pub agents: Vec<AgentObserver>,
    /// Canonical form of the group exosystem (CASE1).
    pub group: Option<CanonicalModel>,
}

impl ObserverSpec {
    /// Canonical models entering `ℒ_ε`.
    pub fn coupling_models(&self) -> Vec<&CanonicalModel> {
        match &self.group {
            Some(g) => vec![g],
            None => self.agents.iter().filter_map(|a| a.canonical.as_ref()).collect(),
        }
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(SynthesisError::EpsilonRange(epsilon));
    }
    Ok(())
}

fn check_mode(reduced: &[ReducedModel], mode: Mode) -> Result<()> {
    if let Some(r) = reduced.iter().find(|r| r.mode != mode) {
        return Err(SynthesisError::ModeMismatch(format!(
            "reduced model built for {} used in a {mode} observer",
            r.mode
        )));
    }
    Ok(())
}

fn high_gain(
    p: usize,
    nbar: usize,
    weights: OutputWeighting,
    epsilon: f64,
) -> Result<(AreSolution, DMatrix<f64>)> {
    let ccal = chain_output(p, nbar);
    let are = solve_filter_are(&shift_matrix(p, nbar), &ccal, &weights)?;
    let gain = scaling_matrix(epsilon, p, nbar) * &are.p * ccal.transpose();
    Ok((are, gain))
}

/// One high-gain observer per agent for the full reduced state `x̄_i`,
/// driven by `y_si` and the relative measurement `ζ_i`.
pub fn build_unified_observer(
    agents: &[AgentModel],
    reduced: &[ReducedModel],
    nbar: usize,
    theta: f64,
    epsilon: f64,
) -> Result<ObserverSpec> {
    check_epsilon(epsilon)?;
    check_mode(reduced, Mode::Unified)?;
    let p1 = agents.first().map_or(0, AgentModel::p1);
    let p2 = agents.first().map_or(0, AgentModel::p2);
    let weights = OutputWeighting { p1, p2, theta };
    let (are, gain) = high_gain(p1 + p2, nbar, weights, epsilon)?;

    let per_agent = reduced
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let cm = pseudo_identical_form(&r.a_bar, &r.b_bar, &r.c_bar, nbar, i + 1)?;
            Ok(AgentObserver {
                recovery: cm.t_pinv.clone(),
                state_dim: cm.dim(),
                canonical: Some(cm),
                k_a: None,
                k_s: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ObserverSpec {
        mode: Mode::Unified,
        epsilon,
        nbar,
        p: p1 + p2,
        p1,
        weights,
        are,
        gain,
        agents: per_agent,
        group: None,
    })
}

/// Local observers for `(x_i, ω_i)` with gains `K_a` plus a distributed
/// high-gain observer for the group exosystem.
pub fn build_case1_observers(
    reduced: &[ReducedModel],
    group: &GroupExosystem,
    k_a: &[DMatrix<f64>],
    theta: f64,
    epsilon: f64,
) -> Result<ObserverSpec> {
    check_epsilon(epsilon)?;
    check_mode(reduced, Mode::Case1)?;
    if k_a.len() != reduced.len() {
        return Err(SynthesisError::Dimension(format!(
            "{} K_a gains for {} agents",
            k_a.len(),
            reduced.len()
        )));
    }
    let (n0, p2) = (group.n0(), group.c0.nrows());
    let cm0 = pseudo_identical_form(&group.a0, &DMatrix::zeros(n0, 0), &group.c0, n0, 0)?;
    let weights = OutputWeighting { p1: 0, p2, theta };
    let (are, gain) = high_gain(p2, n0, weights, epsilon)?;

    let per_agent = reduced
        .iter()
        .zip(k_a)
        .enumerate()
        .map(|(i, (r, k))| {
            check_injection(&r.a_bar, k, &r.c_bar, || format!("agent {}: Ā + K_a C̄", i + 1))?;
            let recovery = block_diag(&[&r.w.transpose(), &cm0.t_pinv]);
            Ok(AgentObserver {
                canonical: None,
                k_a: Some(k.clone()),
                k_s: None,
                state_dim: r.dim() + cm0.dim(),
                recovery,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ObserverSpec {
        mode: Mode::Case1,
        epsilon,
        nbar: n0,
        p: p2,
        p1: 0,
        weights,
        are,
        gain,
        agents: per_agent,
        group: Some(cm0),
    })
}

/// Distributed high-gain observers for `(x_i, x_0)` plus cascaded local
/// observers for `ω_i` with gains `K_s`.
pub fn build_case2_observers(
    agents: &[AgentModel],
    reduced: &[ReducedModel],
    group: &GroupExosystem,
    k_s: &[DMatrix<f64>],
    theta: f64,
    epsilon: f64,
) -> Result<ObserverSpec> {
    check_epsilon(epsilon)?;
    check_mode(reduced, Mode::Case2)?;
    if k_s.len() != agents.len() || reduced.len() != agents.len() {
        return Err(SynthesisError::Dimension(format!(
            "{} K_s gains and {} reduced models for {} agents",
            k_s.len(),
            reduced.len(),
            agents.len()
        )));
    }
    let n0 = group.n0();
    let p2 = group.c0.nrows();
    let nbar = super::chain_length(Mode::Case2, agents, n0);
    let weights = OutputWeighting { p1: 0, p2, theta };
    let (are, gain) = high_gain(p2, nbar, weights, epsilon)?;

    let per_agent = agents
        .iter()
        .zip(reduced)
        .zip(k_s)
        .enumerate()
        .map(|(i, ((ag, r), k))| {
            check_injection(&ag.s, k, &ag.c_w, || format!("agent {}: S + K_s C_w", i + 1))?;
            let cm = pseudo_identical_form(&r.a_bar, &r.b_bar, &r.c_bar, nbar, i + 1)?;
            let (n, q) = (ag.n(), ag.q());
            let z_hat = r.w.transpose() * &cm.t_pinv;
            let mut recovery = DMatrix::zeros(n + q + n0, cm.dim() + q);
            recovery
                .view_mut((0, 0), (n, cm.dim()))
                .copy_from(&z_hat.rows(0, n));
            for j in 0..q {
                recovery[(n + j, cm.dim() + j)] = 1.0;
            }
            recovery
                .view_mut((n + q, 0), (n0, cm.dim()))
                .copy_from(&z_hat.rows(n, n0));
            Ok(AgentObserver {
                state_dim: cm.dim() + q,
                canonical: Some(cm),
                k_a: None,
                k_s: Some(k.clone()),
                recovery,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ObserverSpec {
        mode: Mode::Case2,
        epsilon,
        nbar,
        p: p2,
        p1: 0,
        weights,
        are,
        gain,
        agents: per_agent,
        group: None,
    })
}
