//! Coordinated output regulation of heterogeneous linear multi-agent systems
//! over switching leader-follower networks.

pub mod ctlinalg;
pub mod graphs;
pub mod matrix;
pub mod scenario;
pub mod sim;
pub mod synthesis;

pub use nalgebra;

pub use graphs::{Kappa, LeaderFollowerTopology, Segment, SwitchingSchedule, TopologySet};
pub use scenario::{load_scenario, preset, Scenario, ScenarioError, ValidationReport};
pub use sim::{Feedback, SimConfig, SimTrace};
pub use synthesis::{
    AgentModel, CertificationReport, Design, GainOverrides, GainsFile, GroupExosystem, Mode,
};
