//! Benchmark fixtures shared by the criterion targets.

use coreg_core::scenario::preset;
use coreg_core::sim::{assemble_closed_loop, ClosedLoopSystem, Feedback};
use coreg_core::{Design, Scenario};

/// A preset together with its synthesized design and observer-based closed loop.
pub struct Fixture {
    pub scenario: Scenario,
    pub design: Design,
    pub closed_loop: ClosedLoopSystem,
}

pub fn fixture(name: &str) -> Fixture {
    let scenario = preset(name).expect("known preset");
    let design = scenario.synthesize().expect("preset synthesizes");
    let closed_loop = assemble_closed_loop(&scenario.agents, &scenario.group, &design, Feedback::Observer)
        .expect("closed loop assembles");
    Fixture {
        scenario,
        design,
        closed_loop,
    }
}
