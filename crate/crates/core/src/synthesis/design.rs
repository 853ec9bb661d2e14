use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{
    build_case1_observers, build_case2_observers, build_controller, build_unified_observer,
    certify_high_gain, chain_length, check_network_dimensions, remove_redundant_modes,
    synthesize_feedback, synthesize_injection, topology_lyapunov_certificates, AgentModel,
    CertificationReport, ControllerSpec, GroupExosystem, Mode, ObserverSpec, ReducedModel, Result,
    SynthesisError,
};
use crate::graphs::{
    classify_topologies, verify_switching_assumptions, LeaderFollowerTopology, SwitchReport,
    SwitchingSchedule, TopologySet,
};
use crate::matrix::{from_rows, to_rows};

pub const DEFAULT_EPSILON: f64 = 0.2;
pub const DEFAULT_ALPHA: f64 = 0.5;

/// Optional user-supplied design parameters; anything left `None` is
/// synthesized (gains) or defaulted (ε, θ, α).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GainOverrides {
    pub epsilon: Option<f64>,
    pub theta: Option<f64>,
    pub alpha: Option<f64>,
    pub f: Option<Vec<DMatrix<f64>>>,
    pub k_a: Option<Vec<DMatrix<f64>>>,
    pub k_s: Option<Vec<DMatrix<f64>>>,
}

/// Complete observer-based design for one scenario.
#[derive(Clone, Debug)]
pub struct Design {
    pub mode: Mode,
    pub epsilon: f64,
    pub theta: f64,
    pub alpha: f64,
    pub topology: TopologySet,
    pub switching: SwitchReport,
    pub reduced: Vec<ReducedModel>,
    pub controllers: Vec<ControllerSpec>,
    pub observer: ObserverSpec,
    pub certificates: Vec<DMatrix<f64>>,
    pub certification: CertificationReport,
}

fn pick_gains(
    given: Option<&Vec<DMatrix<f64>>>,
    count: usize,
    name: &str,
    mut make: impl FnMut(usize) -> Result<DMatrix<f64>>,
) -> Result<Vec<DMatrix<f64>>> {
    match given {
        Some(g) if g.len() != count => Err(SynthesisError::Dimension(format!(
            "{} {name} gains supplied for {count} agents",
            g.len()
        ))),
        Some(g) => Ok(g.clone()),
        None => (0..count).map(&mut make).collect(),
    }
}

/// Runs the whole synthesis pipeline.
pub fn synthesize(
    agents: &[AgentModel],
    group: &GroupExosystem,
    graphs: &[LeaderFollowerTopology],
    schedule: &SwitchingSchedule,
    mode: Mode,
    gains: &GainOverrides,
) -> Result<Design> {
    check_network_dimensions(agents, group)?;
    if let Some(g) = graphs.iter().find(|g| g.n() != agents.len()) {
        return Err(SynthesisError::Dimension(format!(
            "graph with {} followers for {} agents",
            g.n(),
            agents.len()
        )));
    }
    let epsilon = gains.epsilon.unwrap_or(DEFAULT_EPSILON);
    let alpha = gains.alpha.unwrap_or(DEFAULT_ALPHA);
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(SynthesisError::EpsilonRange(epsilon));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(SynthesisError::AlphaRange(alpha));
    }

    let topology = classify_topologies(graphs.to_vec(), gains.theta)?;
    let theta = topology.theta;
    let switching = verify_switching_assumptions(schedule, &topology)?;

    let reduced = agents
        .iter()
        .enumerate()
        .map(|(i, ag)| remove_redundant_modes(ag, group, mode, i + 1))
        .collect::<Result<Vec<_>>>()?;

    let f = pick_gains(gains.f.as_ref(), agents.len(), "F", |i| {
        synthesize_feedback(&agents[i].a, &agents[i].b)
    })?;
    let controllers = agents
        .iter()
        .zip(&reduced)
        .zip(&f)
        .enumerate()
        .map(|(i, ((ag, r), f))| build_controller(ag, group, r, f, i + 1))
        .collect::<Result<Vec<_>>>()?;

    let observer = match mode {
        Mode::Unified => {
            let nbar = chain_length(mode, agents, group.n0());
            build_unified_observer(agents, &reduced, nbar, theta, epsilon)?
        }
        Mode::Case1 => {
            let k_a = pick_gains(gains.k_a.as_ref(), agents.len(), "K_a", |i| {
                synthesize_injection(&reduced[i].a_bar, &reduced[i].c_bar)
            })?;
            build_case1_observers(&reduced, group, &k_a, theta, epsilon)?
        }
        Mode::Case2 => {
            let k_s = pick_gains(gains.k_s.as_ref(), agents.len(), "K_s", |i| {
                synthesize_injection(&agents[i].s, &agents[i].c_w)
            })?;
            build_case2_observers(agents, &reduced, group, &k_s, theta, epsilon)?
        }
    };

    let certificates = topology_lyapunov_certificates(&topology)?;
    let certification = certify_high_gain(
        &observer.are,
        &observer.weights,
        &certificates,
        &topology,
        &switching,
        &observer.coupling_models(),
        alpha,
        epsilon,
    )?;

    Ok(Design {
        mode,
        epsilon,
        theta,
        alpha,
        topology,
        switching,
        reduced,
        controllers,
        observer,
        certificates,
        certification,
    })
}

type Rows = Vec<Vec<f64>>;

/// Per-agent block of a gains document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentGains {
    #[serde(rename = "F")]
    pub f: Rows,
    #[serde(rename = "K_a", default, skip_serializing_if = "Option::is_none")]
    pub k_a: Option<Rows>,
    #[serde(rename = "K_s", default, skip_serializing_if = "Option::is_none")]
    pub k_s: Option<Rows>,
    #[serde(rename = "Pi")]
    pub pi: Vec<Rows>,
    #[serde(rename = "Gamma")]
    pub gamma: Vec<Rows>,
}

/// Gains document written by `synthesize` and accepted back as overrides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsFile {
    pub mode: Mode,
    pub epsilon: f64,
    pub theta: f64,
    pub alpha: f64,
    pub agents: Vec<AgentGains>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certification: Option<serde_json::Value>,
}

impl Design {
    pub fn gains_file(&self) -> GainsFile {
        let agents = self
            .controllers
            .iter()
            .zip(&self.observer.agents)
            .map(|(c, o)| AgentGains {
                f: to_rows(&c.f),
                k_a: o.k_a.as_ref().map(to_rows),
                k_s: o.k_s.as_ref().map(to_rows),
                pi: c.regulators.iter().map(|r| to_rows(&r.pi)).collect(),
                gamma: c.regulators.iter().map(|r| to_rows(&r.gamma)).collect(),
            })
            .collect();
        GainsFile {
            mode: self.mode,
            epsilon: self.epsilon,
            theta: self.theta,
            alpha: self.alpha,
            agents,
            certification: serde_json::to_value(&self.certification).ok(),
        }
    }
}

impl GainsFile {
    /// Feedback and injection gains plus ε, θ, α as synthesis overrides.
    ///
    /// Regulator solutions are recomputed during synthesis, so `Pi`/`Gamma`
    /// are informational only.
    pub fn overrides(&self) -> std::result::Result<GainOverrides, String> {
        let conv = |name: &str, i: usize, rows: &Rows| {
            from_rows(rows, 0).map_err(|e| format!("agent {} {name}: {e}", i + 1))
        };
        let collect = |name: &str, pick: &dyn Fn(&AgentGains) -> Option<&Rows>| {
            let picked: Vec<Option<&Rows>> = self.agents.iter().map(pick).collect();
            if picked.iter().all(Option::is_none) {
                return Ok(None);
            }
            picked
                .iter()
                .enumerate()
                .map(|(i, r)| match r {
                    Some(r) => conv(name, i, r),
                    None => Err(format!("agent {}: {name} missing", i + 1)),
                })
                .collect::<std::result::Result<Vec<_>, String>>()
                .map(Some)
        };
        Ok(GainOverrides {
            epsilon: Some(self.epsilon),
            theta: Some(self.theta),
            alpha: Some(self.alpha),
            f: collect("F", &|a| Some(&a.f))?,
            k_a: collect("K_a", &|a| a.k_a.as_ref())?,
            k_s: collect("K_s", &|a| a.k_s.as_ref())?,
        })
    }
}
