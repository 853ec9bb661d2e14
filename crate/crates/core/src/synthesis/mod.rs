//! Observer-based controller synthesis.
//!
//! The pipeline is: redundant-mode removal → regulator equations →
//! pseudo-identical canonical form → observer Riccati equation → distributed
//! observers and controllers, plus the dwell-time / high-gain certification
//! arithmetic for switching topologies.

mod canonical;
mod certify;
mod controller;
mod design;
mod observer;
mod reduce;

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ctlinalg::LinalgError;
use crate::graphs::GraphError;

pub use canonical::{chain_output, pseudo_identical_form, scaling_matrix, shift_matrix, CanonicalModel};
pub use certify::{
    certify_high_gain, epsilon_star, kappa_star, scaled_coupling_norm, topology_lyapunov_certificates,
    CertificateSpectrum, CertificationReport,
};
pub use controller::{build_controller, synthesize_feedback, synthesize_injection, ControllerSpec};
pub use design::{synthesize, AgentGains, Design, GainOverrides, GainsFile, DEFAULT_ALPHA, DEFAULT_EPSILON};
pub use observer::{
    build_case1_observers, build_case2_observers, build_unified_observer, AgentObserver, ObserverSpec,
};
pub use reduce::{remove_redundant_modes, ReducedModel};

#[derive(Debug, Error)]
pub enum SynthesisError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("agent {agent}: observability requirement violated: {detail}")]
    ObservabilityViolation { agent: usize, detail: String },
    #[error("agent {agent}: observability map has rank {rank}, needs {needed}")]
    RankDeficiency { agent: usize, rank: usize, needed: usize },
    #[error("{what} is not Hurwitz (spectral abscissa {abscissa:.3e})")]
    NotHurwitz { what: String, abscissa: f64 },
    #[error("agent {agent}: regulator equations: {source}")]
    Regulator { agent: usize, source: LinalgError },
    #[error("graph {k}: no Lyapunov certificate available for this disconnected topology")]
    CertificateUnavailable { k: usize },
    #[error("epsilon must lie in (0, 1], got {0}")]
    EpsilonRange(f64),
    #[error("alpha must lie in (0, 1), got {0}")]
    AlphaRange(f64),
    #[error("mode mismatch: {0}")]
    ModeMismatch(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub type Result<T> = std::result::Result<T, SynthesisError>;

/// Observer architecture.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// One high-gain observer per agent driven by `y_si` and `ζ_i`.
    #[serde(rename = "UNIFIED", alias = "unified")]
    Unified,
    /// `(A_i, C_si)` observable: local observer for `(x_i, ω_i)` and a
    /// distributed observer for `x_0`.
    #[serde(rename = "CASE1", alias = "case1")]
    Case1,
    /// `(A_i, C_di)` observable: distributed observer for `(x_i, x_0)` and a
    /// cascaded local observer for `ω_i`.
    #[serde(rename = "CASE2", alias = "case2")]
    Case2,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Unified => "UNIFIED",
            Mode::Case1 => "CASE1",
            Mode::Case2 => "CASE2",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "UNIFIED" => Ok(Mode::Unified),
            "CASE1" => Ok(Mode::Case1),
            "CASE2" => Ok(Mode::Case2),
            other => Err(format!("unknown mode {other:?} (expected UNIFIED, CASE1 or CASE2)")),
        }
    }
}

/// Agent `ẋ = Ax + Bu` with individual exosystem `ω̇ = Sω` and output maps
/// `y_s = C_s x + C_w ω`, `y_d = C_d x`, `e = D_s x + D_w ω + D_0 x_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentModel {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c_s: DMatrix<f64>,
    pub c_w: DMatrix<f64>,
    pub c_d: DMatrix<f64>,
    pub d_s: DMatrix<f64>,
    pub d_w: DMatrix<f64>,
    pub s: DMatrix<f64>,
    pub omega0: DVector<f64>,
    pub x_init: DVector<f64>,
}

impl AgentModel {
    pub fn n(&self) -> usize {
        self.a.nrows()
    }
    pub fn m(&self) -> usize {
        self.b.ncols()
    }
    pub fn q(&self) -> usize {
        self.s.nrows()
    }
    pub fn p1(&self) -> usize {
        self.c_s.nrows()
    }
    pub fn p2(&self) -> usize {
        self.c_d.nrows()
    }
    /// Number of tracking-error rows.
    pub fn pe(&self) -> usize {
        self.d_s.nrows()
    }

    /// Checks every block against `n`, `m`, `q` and the output row counts.
    pub fn check_dimensions(&self) -> std::result::Result<(), String> {
        let (n, m, q) = (self.n(), self.m(), self.q());
        let (p1, p2, pe) = (self.p1(), self.p2(), self.pe());
        let checks: [(&str, &DMatrix<f64>, usize, usize); 8] = [
            ("A", &self.a, n, n),
            ("B", &self.b, n, m),
            ("C_s", &self.c_s, p1, n),
            ("C_w", &self.c_w, p1, q),
            ("C_d", &self.c_d, p2, n),
            ("D_s", &self.d_s, pe, n),
            ("D_w", &self.d_w, pe, q),
            ("S", &self.s, q, q),
        ];
        for (name, mat, r, c) in checks {
            if mat.shape() != (r, c) {
                return Err(format!(
                    "{name} must be {r}x{c}, got {}x{}",
                    mat.nrows(),
                    mat.ncols()
                ));
            }
        }
        if self.omega0.len() != q {
            return Err(format!("omega0 must have length {q}, got {}", self.omega0.len()));
        }
        if self.x_init.len() != n {
            return Err(format!("x0 must have length {n}, got {}", self.x_init.len()));
        }
        Ok(())
    }
}

/// Group exosystem `ẋ_0 = A_0 x_0` with `y_d0 = C_0 x_0`; `D_0` enters every
/// agent's tracking error.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupExosystem {
    pub a0: DMatrix<f64>,
    pub c0: DMatrix<f64>,
    pub d0: DMatrix<f64>,
    pub x0_init: DVector<f64>,
}

impl GroupExosystem {
    pub fn n0(&self) -> usize {
        self.a0.nrows()
    }

    pub fn check_dimensions(&self, p2: usize, pe: usize) -> std::result::Result<(), String> {
        let n0 = self.n0();
        if self.a0.shape() != (n0, n0) {
            return Err(format!("A0 must be square, got {}x{}", self.a0.nrows(), self.a0.ncols()));
        }
        if self.c0.shape() != (p2, n0) {
            return Err(format!(
                "C0 must be {p2}x{n0}, got {}x{}",
                self.c0.nrows(),
                self.c0.ncols()
            ));
        }
        if self.d0.shape() != (pe, n0) {
            return Err(format!(
                "D0 must be {pe}x{n0}, got {}x{}",
                self.d0.nrows(),
                self.d0.ncols()
            ));
        }
        if self.x0_init.len() != n0 {
            return Err(format!("x0 must have length {n0}, got {}", self.x0_init.len()));
        }
        Ok(())
    }
}

/// Checks that all agents share output dimensions and match the group exosystem.
pub fn check_network_dimensions(agents: &[AgentModel], group: &GroupExosystem) -> Result<()> {
    let first = agents
        .first()
        .ok_or_else(|| SynthesisError::Dimension("at least one agent is required".into()))?;
    let (p1, p2, pe) = (first.p1(), first.p2(), first.pe());
    for (i, ag) in agents.iter().enumerate() {
        ag.check_dimensions()
            .map_err(|e| SynthesisError::Dimension(format!("agent {}: {e}", i + 1)))?;
        if (ag.p1(), ag.p2(), ag.pe()) != (p1, p2, pe) {
            return Err(SynthesisError::Dimension(format!(
                "agent {} output sizes (p1, p2, pe) = ({}, {}, {}) differ from agent 1's ({p1}, {p2}, {pe})",
                i + 1,
                ag.p1(),
                ag.p2(),
                ag.pe()
            )));
        }
    }
    group
        .check_dimensions(p2, pe)
        .map_err(|e| SynthesisError::Dimension(format!("group: {e}")))
}

/// Size `n̄` of the chain used by the distributed observer.
pub fn chain_length(mode: Mode, agents: &[AgentModel], n0: usize) -> usize {
    match mode {
        Mode::Unified => n0 + agents.iter().map(|a| a.n() + a.q()).max().unwrap_or(0),
        Mode::Case1 => n0,
        Mode::Case2 => n0 + agents.iter().map(AgentModel::n).max().unwrap_or(0),
    }
}
