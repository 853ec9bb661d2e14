//! Deterministic fixed-step simulation of the switched closed loop.
//!
//! The closed loop is linear and time-invariant between switches, so each
//! topology gets one drift matrix `M_k` and one exact classical-RK4 step
//! operator `Φ_k = I + hM + (hM)²/2 + (hM)³/6 + (hM)⁴/24`.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ctlinalg::{vstack, LinalgError};
use crate::graphs::SwitchingSchedule;
use crate::synthesis::{AgentModel, Design, GroupExosystem, Mode};

/// Divergence guard on the state magnitude.
pub const OVERFLOW_GUARD: f64 = 1e12;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("segment {index} of duration {duration} is not an integer multiple of h = {h}")]
    Alignment { index: usize, duration: f64, h: f64 },
    #[error("state exceeded {OVERFLOW_GUARD:e} at t = {t} (closed loop unstable)")]
    NonFinite { t: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("schedule refers to graph {k}, but the system has {count} drift matrices")]
    UnknownGraph { k: usize, count: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub h: f64,
    pub horizon: f64,
    pub record_stride: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            h: 1e-3,
            horizon: 200.0,
            record_stride: 10,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(SimError::Config(format!("h must be positive, got {}", self.h)));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(SimError::Config(format!(
                "horizon must be non-negative, got {}",
                self.horizon
            )));
        }
        if self.record_stride == 0 {
            return Err(SimError::Config("record_stride must be at least 1".into()));
        }
        Ok(())
    }
}

/// How the controller obtains its estimates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Feedback {
    /// Distributed observers as designed.
    Observer,
    /// Observers removed; controllers read the true plant and exosystem states.
    TrueState,
}

/// Position of every sub-state in the stacked closed-loop state
/// `[x_1 … x_N, ω_1 … ω_N, x_0, η_1 … η_N]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateLayout {
    pub x: Vec<Range<usize>>,
    pub omega: Vec<Range<usize>>,
    pub x0: Range<usize>,
    pub observers: Vec<Range<usize>>,
    pub dim: usize,
}

impl StateLayout {
    fn new(agents: &[AgentModel], n0: usize, obs_dims: &[usize]) -> Self {
        let mut next = 0;
        let mut take = |len: usize| {
            let r = next..next + len;
            next += len;
            r
        };
        let x = agents.iter().map(|a| take(a.n())).collect();
        let omega = agents.iter().map(|a| take(a.q())).collect();
        let x0 = take(n0);
        let observers = obs_dims.iter().map(|&d| take(d)).collect();
        Self {
            x,
            omega,
            x0,
            observers,
            dim: next,
        }
    }
}

/// Switched linear closed loop `Ẋ = M_σ X` with output maps.
#[derive(Clone, Debug)]
pub struct ClosedLoopSystem {
    pub layout: Option<StateLayout>,
    /// `M_k` for graph `k` at index `k − 1`.
    pub drifts: Vec<DMatrix<f64>>,
    /// `e_i = E_i X`.
    pub error_maps: Vec<DMatrix<f64>>,
    /// `y_di = C_di x_i` as a map on `X`.
    pub output_maps: Vec<DMatrix<f64>>,
    /// True minus estimated observer state, per agent.
    pub observer_error_maps: Vec<DMatrix<f64>>,
    pub initial_state: DVector<f64>,
}

impl ClosedLoopSystem {
    /// A bare switched system with a single error channel equal to the state.
    pub fn from_drifts(drifts: Vec<DMatrix<f64>>, initial_state: DVector<f64>) -> Self {
        let n = initial_state.len();
        Self {
            layout: None,
            drifts,
            error_maps: vec![DMatrix::identity(n, n)],
            output_maps: Vec::new(),
            observer_error_maps: Vec::new(),
            initial_state,
        }
    }

    pub fn dim(&self) -> usize {
        self.initial_state.len()
    }
}

/// Adds `blk` into the sub-block of `m` at `(rows, cols)`.
fn add_block(m: &mut DMatrix<f64>, rows: &Range<usize>, cols: &Range<usize>, blk: &DMatrix<f64>) {
    debug_assert_eq!(blk.shape(), (rows.len(), cols.len()));
    if blk.is_empty() {
        return;
    }
    let mut v = m.view_mut((rows.start, cols.start), (rows.len(), cols.len()));
    v += blk;
}

fn stack(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    vstack(&blocks.iter().collect::<Vec<_>>())
}

/// Map `X ↦ sub-state` for a range of the stacked state.
fn selector(range: &Range<usize>, dim: usize) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(range.len(), dim);
    for (r, c) in range.clone().enumerate() {
        s[(r, c)] = 1.0;
    }
    s
}

/// Builds the closed loop of a synthesized design, one drift matrix per graph.
pub fn assemble_closed_loop(
    agents: &[AgentModel],
    group: &GroupExosystem,
    design: &Design,
    feedback: Feedback,
) -> Result<ClosedLoopSystem> {
    let count = agents.len();
    if design.controllers.len() != count || design.observer.agents.len() != count {
        return Err(SimError::Dimension(format!(
            "design has {} controllers for {count} agents",
            design.controllers.len()
        )));
    }
    let mode = design.mode;
    let obs = &design.observer;
    let obs_dims: Vec<usize> = match feedback {
        Feedback::Observer => obs.agents.iter().map(|o| o.state_dim).collect(),
        Feedback::TrueState => vec![0; count],
    };
    let lay = StateLayout::new(agents, group.n0(), &obs_dims);
    let dim = lay.dim;
    let sel = |r: &Range<usize>| selector(r, dim);

    // u_i = U_i X
    let inputs: Vec<DMatrix<f64>> = (0..count)
        .map(|i| {
            let gain = design.controllers[i].estimate_gain();
            match feedback {
                Feedback::Observer => gain * &obs.agents[i].recovery * sel(&lay.observers[i]),
                Feedback::TrueState => {
                    let z = stack(&[sel(&lay.x[i]), sel(&lay.omega[i]), sel(&lay.x0)]);
                    match mode {
                        Mode::Unified => gain * &design.reduced[i].w * z,
                        Mode::Case1 | Mode::Case2 => gain * z,
                    }
                }
            }
        })
        .collect();

    let mut base = DMatrix::<f64>::zeros(dim, dim);
    for (i, ag) in agents.iter().enumerate() {
        add_block(&mut base, &lay.x[i], &lay.x[i], &ag.a);
        let bu = &ag.b * &inputs[i];
        add_block(&mut base, &lay.x[i], &(0..dim), &bu);
        add_block(&mut base, &lay.omega[i], &lay.omega[i], &ag.s);
    }
    add_block(&mut base, &lay.x0, &lay.x0, &group.a0);

    let mut drifts = Vec::with_capacity(design.topology.len());
    for k in 1..=design.topology.len() {
        let mut m = base.clone();
        if feedback == Feedback::Observer {
            observer_blocks(&mut m, agents, group, design, &lay, &inputs, design.topology.laplacian(k));
        }
        drifts.push(m);
    }

    let error_maps = agents
        .iter()
        .enumerate()
        .map(|(i, ag)| {
            &ag.d_s * sel(&lay.x[i]) + &ag.d_w * sel(&lay.omega[i]) + &group.d0 * sel(&lay.x0)
        })
        .collect();
    let output_maps = agents
        .iter()
        .enumerate()
        .map(|(i, ag)| &ag.c_d * sel(&lay.x[i]))
        .collect();
    let observer_error_maps = match feedback {
        Feedback::TrueState => vec![DMatrix::zeros(0, dim); count],
        Feedback::Observer => (0..count)
            .map(|i| observer_error_map(design, &lay, i, dim))
            .collect(),
    };

    let mut initial_state = DVector::zeros(dim);
    for (i, ag) in agents.iter().enumerate() {
        initial_state.rows_mut(lay.x[i].start, ag.n()).copy_from(&ag.x_init);
        initial_state
            .rows_mut(lay.omega[i].start, ag.q())
            .copy_from(&ag.omega0);
    }
    initial_state
        .rows_mut(lay.x0.start, group.n0())
        .copy_from(&group.x0_init);

    Ok(ClosedLoopSystem {
        layout: Some(lay),
        drifts,
        error_maps,
        output_maps,
        observer_error_maps,
        initial_state,
    })
}

/// Observer rows of the drift matrix for one topology with Laplacian `l`.
fn observer_blocks(
    m: &mut DMatrix<f64>,
    agents: &[AgentModel],
    group: &GroupExosystem,
    design: &Design,
    lay: &StateLayout,
    inputs: &[DMatrix<f64>],
    l: &DMatrix<f64>,
) {
    let obs = &design.observer;
    let all = 0..lay.dim;
    let g = &obs.gain;
    for (i, ag) in agents.iter().enumerate() {
        let eta = &lay.observers[i];
        let ao = &obs.agents[i];
        match design.mode {
            Mode::Unified => {
                let cm = ao.canonical.as_ref().expect("canonical form for UNIFIED");
                let ccal = cm.ccal();
                let (p1, p) = (obs.p1, obs.p);
                let g1 = g.columns(0, p1).into_owned();
                let g2 = g.columns(p1, p - p1).into_owned();
                let c1 = ccal.rows(0, p1).into_owned();
                let c2 = ccal.rows(p1, p - p1).into_owned();
                add_block(m, eta, eta, &(cm.drift() - &g1 * &c1));
                add_block(m, eta, &all, &(&cm.b_cal * &inputs[i]));
                add_block(m, eta, &lay.x[i], &(&g1 * &ag.c_s));
                add_block(m, eta, &lay.omega[i], &(&g1 * &ag.c_w));
                for (j, agj) in agents.iter().enumerate() {
                    let lij = l[(i, j)];
                    if lij == 0.0 {
                        continue;
                    }
                    add_block(m, eta, &lay.x[j], &(&g2 * &agj.c_d * lij));
                    add_block(m, eta, &lay.x0, &(&g2 * &group.c0 * -lij));
                    add_block(m, eta, &lay.observers[j], &(&g2 * &c2 * -lij));
                }
            }
            Mode::Case1 => {
                let r = &design.reduced[i];
                let k = ao.k_a.as_ref().expect("K_a for CASE1");
                let cm0 = obs.group.as_ref().expect("group canonical form for CASE1");
                let d = r.dim();
                let xbar = eta.start..eta.start + d;
                let chi0 = eta.start + d..eta.end;
                add_block(m, &xbar, &xbar, &(&r.a_bar + k * &r.c_bar));
                add_block(m, &xbar, &all, &(&r.b_bar * &inputs[i]));
                add_block(m, &xbar, &lay.x[i], &(k * &ag.c_s * -1.0));
                add_block(m, &xbar, &lay.omega[i], &(k * &ag.c_w * -1.0));

                let c0cal = cm0.ccal();
                add_block(m, &chi0, &chi0, &cm0.drift());
                for (j, agj) in agents.iter().enumerate() {
                    let lij = l[(i, j)];
                    if lij == 0.0 {
                        continue;
                    }
                    let eta_j = &lay.observers[j];
                    let xhat_j = eta_j.start..eta_j.start + agj.n();
                    let chi0_j = eta_j.start + design.reduced[j].dim()..eta_j.end;
                    add_block(m, &chi0, &lay.x[j], &(g * &agj.c_d * -lij));
                    add_block(m, &chi0, &lay.x0, &(g * &group.c0 * lij));
                    add_block(m, &chi0, &xhat_j, &(g * &agj.c_d * lij));
                    add_block(m, &chi0, &chi0_j, &(g * &c0cal * -lij));
                }
            }
            Mode::Case2 => {
                let cm = ao.canonical.as_ref().expect("canonical form for CASE2");
                let ks = ao.k_s.as_ref().expect("K_s for CASE2");
                let d = cm.dim();
                let chi = eta.start..eta.start + d;
                let what = eta.start + d..eta.end;
                let ccal = cm.ccal();
                add_block(m, &chi, &chi, &cm.drift());
                add_block(m, &chi, &all, &(&cm.b_cal * &inputs[i]));
                for (j, agj) in agents.iter().enumerate() {
                    let lij = l[(i, j)];
                    if lij == 0.0 {
                        continue;
                    }
                    let chi_j = lay.observers[j].start..lay.observers[j].start + d;
                    add_block(m, &chi, &lay.x[j], &(g * &agj.c_d * lij));
                    add_block(m, &chi, &lay.x0, &(g * &group.c0 * -lij));
                    add_block(m, &chi, &chi_j, &(g * &ccal * -lij));
                }
                let r_x = ao.recovery.view((0, 0), (ag.n(), d)).into_owned();
                add_block(m, &what, &chi, &(ks * &ag.c_s * r_x));
                add_block(m, &what, &what, &(&ag.s + ks * &ag.c_w));
                add_block(m, &what, &lay.x[i], &(ks * &ag.c_s * -1.0));
                add_block(m, &what, &lay.omega[i], &(ks * &ag.c_w * -1.0));
            }
        }
    }
}

/// `X ↦ (true observer target) − η_i`.
fn observer_error_map(design: &Design, lay: &StateLayout, i: usize, dim: usize) -> DMatrix<f64> {
    let sel = |r: &Range<usize>| selector(r, dim);
    let ao = &design.observer.agents[i];
    let r = &design.reduced[i];
    let eta = sel(&lay.observers[i]);
    let target = match design.mode {
        Mode::Unified => {
            let cm = ao.canonical.as_ref().expect("canonical form");
            let z = stack(&[sel(&lay.x[i]), sel(&lay.omega[i]), sel(&lay.x0)]);
            &cm.t * &r.w * z
        }
        Mode::Case1 => {
            let cm0 = design.observer.group.as_ref().expect("group canonical form");
            let z = stack(&[sel(&lay.x[i]), sel(&lay.omega[i])]);
            stack(&[&r.w * z, &cm0.t * sel(&lay.x0)])
        }
        Mode::Case2 => {
            let cm = ao.canonical.as_ref().expect("canonical form");
            let z = stack(&[sel(&lay.x[i]), sel(&lay.x0)]);
            stack(&[&cm.t * &r.w * z, sel(&lay.omega[i])])
        }
    };
    target - eta
}

/// Exact classical RK4 step operator of `Ẋ = MX` for step `h`.
pub fn rk4_operator(m: &DMatrix<f64>, h: f64) -> DMatrix<f64> {
    let n = m.nrows();
    let hm = m * h;
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut phi = term.clone();
    for k in 1..=4 {
        term = &term * &hm / k as f64;
        phi += &term;
    }
    phi
}

/// Recorded simulation output.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimTrace {
    pub times: Vec<f64>,
    /// Graph active on `[t, t + h)` at each recorded instant.
    pub sigma: Vec<usize>,
    /// Stacked `[e_1; …; e_N]` per record.
    pub errors: Vec<Vec<f64>>,
    /// Stacked `[y_d1; …; y_dN]` per record.
    pub outputs: Vec<Vec<f64>>,
    /// `‖true − estimated observer state‖` per agent and record.
    pub observer_errors: Vec<Vec<f64>>,
    pub error_dims: Vec<usize>,
    pub output_dims: Vec<usize>,
    pub final_state: DVector<f64>,
}

impl SimTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn agent_count(&self) -> usize {
        self.error_dims.len()
    }

    /// `e_i` at record `r`.
    pub fn agent_error(&self, i: usize, r: usize) -> &[f64] {
        let start: usize = self.error_dims[..i].iter().sum();
        &self.errors[r][start..start + self.error_dims[i]]
    }

    /// `max_i ‖e_i‖` at record `r`.
    pub fn max_error_norm(&self, r: usize) -> f64 {
        (0..self.agent_count())
            .map(|i| norm(self.agent_error(i, r)))
            .fold(0.0, f64::max)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Segment list in whole steps; `None` duration for a final held segment.
fn step_plan(schedule: &SwitchingSchedule, h: f64) -> Result<Vec<(usize, u64)>> {
    schedule
        .segments
        .iter()
        .enumerate()
        .map(|(index, s)| {
            let steps = (s.duration / h).round();
            if steps < 1.0 || (steps * h - s.duration).abs() > 1e-9 * s.duration.max(h) {
                return Err(SimError::Alignment {
                    index,
                    duration: s.duration,
                    h,
                });
            }
            Ok((s.graph, steps as u64))
        })
        .collect()
}

/// Integrates the closed loop over `[t0, t0 + horizon]` following `schedule`.
///
/// Switches fall exactly on step boundaries; a final partial step is taken if
/// the horizon is not a multiple of `h`.
pub fn integrate(
    system: &ClosedLoopSystem,
    schedule: &SwitchingSchedule,
    config: &SimConfig,
) -> Result<SimTrace> {
    config.validate()?;
    let h = config.h;
    let plan = step_plan(schedule, h)?;
    let count = system.drifts.len();
    if let Some(&(k, _)) = plan.iter().find(|(k, _)| *k == 0 || *k > count) {
        return Err(SimError::UnknownGraph { k, count });
    }
    let dim = system.dim();
    if let Some(m) = system.drifts.iter().find(|m| m.shape() != (dim, dim)) {
        return Err(SimError::Dimension(format!(
            "drift is {}x{}, state has {dim} entries",
            m.nrows(),
            m.ncols()
        )));
    }

    let phis: Vec<DMatrix<f64>> = system.drifts.iter().map(|m| rk4_operator(m, h)).collect();
    let full_steps = (config.horizon / h + 1e-9).floor() as u64;
    let tail = config.horizon - full_steps as f64 * h;
    let has_tail = tail > 1e-9 * h;

    let mut trace = SimTrace {
        error_dims: system.error_maps.iter().map(|m| m.nrows()).collect(),
        output_dims: system.output_maps.iter().map(|m| m.nrows()).collect(),
        ..SimTrace::default()
    };
    let record = |trace: &mut SimTrace, t: f64, k: usize, x: &DVector<f64>| {
        trace.times.push(t);
        trace.sigma.push(k);
        trace
            .errors
            .push(system.error_maps.iter().flat_map(|m| (m * x).iter().copied().collect::<Vec<_>>()).collect());
        trace
            .outputs
            .push(system.output_maps.iter().flat_map(|m| (m * x).iter().copied().collect::<Vec<_>>()).collect());
        trace
            .observer_errors
            .push(system.observer_error_maps.iter().map(|m| (m * x).norm()).collect());
    };

    let mut x = system.initial_state.clone();
    let mut next = DVector::zeros(dim);
    let (mut seg, mut left) = (0usize, plan[0].1);
    let t0 = schedule.t0;
    let mut step: u64 = 0;
    record(&mut trace, t0, plan[0].0, &x);

    while step < full_steps {
        let k = plan[seg].0;
        phis[k - 1].mul_to(&x, &mut next);
        std::mem::swap(&mut x, &mut next);
        step += 1;
        let t = t0 + step as f64 * h;
        if x.iter().any(|v| v.is_nan() || v.abs() > OVERFLOW_GUARD) {
            return Err(SimError::NonFinite { t });
        }
        left -= 1;
        if left == 0 {
            if seg + 1 < plan.len() {
                seg += 1;
            } else if schedule.periodic {
                seg = 0;
            }
            // a non-periodic schedule holds its last graph forever
            left = if seg + 1 == plan.len() && !schedule.periodic {
                u64::MAX
            } else {
                plan[seg].1
            };
        }
        if step.is_multiple_of(config.record_stride as u64) || (step == full_steps && !has_tail) {
            record(&mut trace, t, plan[seg].0, &x);
        }
    }
    if has_tail {
        let k = plan[seg].0;
        x = rk4_operator(&system.drifts[k - 1], tail) * &x;
        let t = t0 + config.horizon;
        if x.iter().any(|v| v.is_nan() || v.abs() > OVERFLOW_GUARD) {
            return Err(SimError::NonFinite { t });
        }
        record(&mut trace, t, k, &x);
    }
    trace.final_state = x;
    Ok(trace)
}

/// Pointwise tracking error `e = D_s x + D_w ω + D_0 x_0`.
pub fn tracking_error(
    agent: &AgentModel,
    d0: &DMatrix<f64>,
    x: &DVector<f64>,
    omega: &DVector<f64>,
    x0: &DVector<f64>,
) -> DVector<f64> {
    &agent.d_s * x + &agent.d_w * omega + d0 * x0
}

/// Per-agent error series `e_i(t_r)` of a trace.
pub fn tracking_errors(trace: &SimTrace) -> Vec<Vec<Vec<f64>>> {
    (0..trace.agent_count())
        .map(|i| (0..trace.len()).map(|r| trace.agent_error(i, r).to_vec()).collect())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SettlingTime {
    pub tol: f64,
    /// `None` when the error never stays below `tol` (NOT_SETTLED).
    pub time: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub settling_time: Vec<SettlingTime>,
    pub final_error_norms: Vec<f64>,
    pub peak_error_norms: Vec<f64>,
}

impl ConvergenceReport {
    pub fn settling(&self, tol: f64) -> Option<f64> {
        self.settling_time
            .iter()
            .find(|s| s.tol == tol)
            .and_then(|s| s.time)
    }
}

/// Settling times `inf{t : max_i ‖e_i(τ)‖ ≤ tol ∀ recorded τ ≥ t}` plus peak
/// and final per-agent error norms.
pub fn convergence_metrics(trace: &SimTrace, tolerances: &[f64]) -> ConvergenceReport {
    let max_norms: Vec<f64> = (0..trace.len()).map(|r| trace.max_error_norm(r)).collect();
    let settling_time = tolerances
        .iter()
        .map(|&tol| {
            let time = match max_norms.iter().rposition(|&e| e.is_nan() || e > tol) {
                None => trace.times.first().copied(),
                Some(last) => trace.times.get(last + 1).copied(),
            };
            SettlingTime { tol, time }
        })
        .collect();
    let agents = trace.agent_count();
    let final_error_norms = match trace.len() {
        0 => vec![0.0; agents],
        n => (0..agents).map(|i| norm(trace.agent_error(i, n - 1))).collect(),
    };
    let peak_error_norms = (0..agents)
        .map(|i| {
            (0..trace.len())
                .map(|r| norm(trace.agent_error(i, r)))
                .fold(0.0, f64::max)
        })
        .collect();
    ConvergenceReport {
        settling_time,
        final_error_norms,
        peak_error_norms,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::Segment;

    fn m(r: usize, c: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(r, c, v)
    }

    #[test]
    fn rotation_over_one_period() {
        let sys = ClosedLoopSystem::from_drifts(
            vec![m(2, 2, &[0.0, 1.0, -1.0, 0.0])],
            DVector::from_vec(vec![1.0, 0.0]),
        );
        let cfg = SimConfig {
            h: 1e-3,
            horizon: 2.0 * std::f64::consts::PI,
            record_stride: 100,
        };
        let tr = integrate(&sys, &SwitchingSchedule::constant(1, 0.0), &cfg).unwrap();
        assert!((tr.times.last().unwrap() - cfg.horizon).abs() < 1e-12);
        let err = (&tr.final_state - DVector::from_vec(vec![1.0, 0.0])).norm();
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn zero_drift_is_constant() {
        let sys = ClosedLoopSystem::from_drifts(vec![DMatrix::zeros(2, 2)], DVector::from_vec(vec![3.0, -1.0]));
        let cfg = SimConfig {
            h: 0.01,
            horizon: 1.0,
            record_stride: 1,
        };
        let tr = integrate(&sys, &SwitchingSchedule::constant(1, 0.0), &cfg).unwrap();
        assert!(tr.errors.iter().all(|e| e == &vec![3.0, -1.0]));
    }

    #[test]
    fn switch_takes_effect_exactly_at_the_boundary() {
        // graph 1 holds, graph 2 integrates ẋ = 1
        let sys = ClosedLoopSystem::from_drifts(
            vec![DMatrix::zeros(2, 2), m(2, 2, &[0.0, 1.0, 0.0, 0.0])],
            DVector::from_vec(vec![0.0, 1.0]),
        );
        let sched = SwitchingSchedule::new(
            vec![
                Segment { graph: 1, duration: 6.0 },
                Segment { graph: 2, duration: 6.0 },
            ],
            true,
            0.0,
        )
        .unwrap();
        let cfg = SimConfig {
            h: 1e-3,
            horizon: 6.002,
            record_stride: 1,
        };
        let tr = integrate(&sys, &sched, &cfg).unwrap();
        let at = |t: f64| tr.times.iter().position(|&s| (s - t).abs() < 1e-9).unwrap();
        assert_eq!(tr.sigma[at(5.999)], 1);
        assert_eq!(tr.sigma[at(6.0)], 2);
        assert_eq!(tr.errors[at(6.0)][0], 0.0);
        assert!((tr.errors[at(6.001)][0] - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn misaligned_segments_are_rejected() {
        let sys = ClosedLoopSystem::from_drifts(vec![DMatrix::zeros(1, 1)], DVector::zeros(1));
        let sched = SwitchingSchedule::new(vec![Segment { graph: 1, duration: 0.0105 }], true, 0.0).unwrap();
        let cfg = SimConfig {
            h: 1e-3,
            horizon: 1.0,
            record_stride: 1,
        };
        assert!(matches!(integrate(&sys, &sched, &cfg), Err(SimError::Alignment { .. })));
    }

    #[test]
    fn divergence_is_reported() {
        let sys = ClosedLoopSystem::from_drifts(vec![m(1, 1, &[10.0])], DVector::from_vec(vec![1.0]));
        let cfg = SimConfig {
            h: 1e-2,
            horizon: 10.0,
            record_stride: 1,
        };
        assert!(matches!(
            integrate(&sys, &SwitchingSchedule::constant(1, 0.0), &cfg),
            Err(SimError::NonFinite { .. })
        ));
    }

    #[test]
    fn settling_time_of_exponential_decay() {
        let sys = ClosedLoopSystem::from_drifts(vec![m(1, 1, &[-1.0])], DVector::from_vec(vec![1.0]));
        let cfg = SimConfig {
            h: 1e-3,
            horizon: 10.0,
            record_stride: 1,
        };
        let tr = integrate(&sys, &SwitchingSchedule::constant(1, 0.0), &cfg).unwrap();
        let rep = convergence_metrics(&tr, &[1e-2, 1e-1, 2.0, 1e-30]);
        let t = rep.settling(1e-2).unwrap();
        assert!((t - 100f64.ln()).abs() <= cfg.h, "{t}");
        assert!(rep.settling(1e-1).unwrap() <= t);
        assert_eq!(rep.settling(2.0), Some(0.0));
        assert_eq!(rep.settling(1e-30), None);
        assert!((rep.peak_error_norms[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tracking_error_arithmetic() {
        let ag = AgentModel {
            a: DMatrix::zeros(3, 3),
            b: DMatrix::zeros(3, 1),
            c_s: m(1, 3, &[1.0, 1.0, 1.0]),
            c_w: m(1, 1, &[-1.0]),
            c_d: m(1, 3, &[1.0, 1.0, 1.0]),
            d_s: m(1, 3, &[1.0, 1.0, 1.0]),
            d_w: m(1, 1, &[-1.0]),
            s: m(1, 1, &[0.0]),
            omega0: DVector::from_vec(vec![-2.0]),
            x_init: DVector::zeros(3),
        };
        let e = tracking_error(
            &ag,
            &m(1, 2, &[-1.0, 0.0]),
            &DVector::zeros(3),
            &DVector::from_vec(vec![-2.0]),
            &DVector::from_vec(vec![1.0, 0.0]),
        );
        assert_eq!(e[0], 1.0);
    }

    #[test]
    fn reruns_are_bit_identical() {
        let sys = ClosedLoopSystem::from_drifts(
            vec![m(2, 2, &[-0.3, 1.0, -1.0, -0.1]), m(2, 2, &[0.1, 2.0, -0.5, -0.7])],
            DVector::from_vec(vec![1.0, -2.0]),
        );
        let sched = SwitchingSchedule::new(
            vec![Segment { graph: 1, duration: 0.5 }, Segment { graph: 2, duration: 0.25 }],
            true,
            0.0,
        )
        .unwrap();
        let cfg = SimConfig {
            h: 1e-3,
            horizon: 20.0,
            record_stride: 7,
        };
        let a = integrate(&sys, &sched, &cfg).unwrap();
        let b = integrate(&sys, &sched, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
