use nalgebra::DMatrix;

use super::{AgentModel, GroupExosystem, Mode, Result, SynthesisError};
use crate::ctlinalg::{block_diag, hstack, observability_staircase, vstack};

/// Agent model with unobservable exosystem modes removed.
///
/// `x̄ = W z` where `z` stacks the agent state and the exosystem coordinates
/// of the selected mode; `W = blkdiag(I, V)` has orthonormal rows, keeps the
/// agent coordinates intact and projects the exosystem part onto its
/// observable subspace.
#[derive(Clone, Debug)]
pub struct ReducedModel {
    pub mode: Mode,
    pub w: DMatrix<f64>,
    pub a_bar: DMatrix<f64>,
    pub b_bar: DMatrix<f64>,
    pub c_bar: DMatrix<f64>,
    /// Agent state dimension (size of `x̄_1`).
    pub n_x: usize,
    /// Size of `x̄_2`.
    pub dim2: usize,
    /// Exosystem error map expressed in `x̄_2` coordinates.
    pub dm_reduced: DMatrix<f64>,
}

impl ReducedModel {
    pub fn a12(&self) -> DMatrix<f64> {
        self.a_bar.view((0, self.n_x), (self.n_x, self.dim2)).into_owned()
    }

    pub fn a22(&self) -> DMatrix<f64> {
        self.a_bar
            .view((self.n_x, self.n_x), (self.dim2, self.dim2))
            .into_owned()
    }

    /// `V`: rows map exosystem coordinates to `x̄_2`.
    pub fn exo_projection(&self) -> DMatrix<f64> {
        let cols = self.w.ncols() - self.n_x;
        self.w.view((self.n_x, self.n_x), (self.dim2, cols)).into_owned()
    }

    pub fn dim(&self) -> usize {
        self.n_x + self.dim2
    }
}

/// Composite exosystem for one agent under `mode`: `(S_exo, C_x, C_exo, D_exo)`.
fn composite(agent: &AgentModel, group: &GroupExosystem, mode: Mode) -> [DMatrix<f64>; 4] {
    let (q, n0) = (agent.q(), group.n0());
    match mode {
        Mode::Unified => {
            let p1 = agent.p1();
            let p2 = agent.p2();
            let c_exo = vstack(&[
                &hstack(&[&agent.c_w, &DMatrix::zeros(p1, n0)]),
                &hstack(&[&DMatrix::zeros(p2, q), &(-&group.c0)]),
            ]);
            [
                block_diag(&[&agent.s, &group.a0]),
                vstack(&[&agent.c_s, &agent.c_d]),
                c_exo,
                hstack(&[&agent.d_w, &group.d0]),
            ]
        }
        Mode::Case1 => [
            agent.s.clone(),
            agent.c_s.clone(),
            agent.c_w.clone(),
            agent.d_w.clone(),
        ],
        Mode::Case2 => [
            group.a0.clone(),
            agent.c_d.clone(),
            -&group.c0,
            group.d0.clone(),
        ],
    }
}

/// Removes exosystem modes that are invisible in the mode's measured outputs.
///
/// `agent_index` is 1-based and only used in error messages.
pub fn remove_redundant_modes(
    agent: &AgentModel,
    group: &GroupExosystem,
    mode: Mode,
    agent_index: usize,
) -> Result<ReducedModel> {
    let n = agent.n();
    let [s_exo, c_x, c_exo, d_exo] = composite(agent, group, mode);
    let viol = |detail: String| SynthesisError::ObservabilityViolation {
        agent: agent_index,
        detail,
    };

    let own = observability_staircase(&agent.a, &c_x)?;
    if own.dim < n {
        let which = match mode {
            Mode::Unified => "(A, [C_s; C_d])",
            Mode::Case1 => "(A, C_s)",
            Mode::Case2 => "(A, C_d)",
        };
        return Err(viol(format!("{which} is not observable")));
    }

    let q_exo = s_exo.nrows();
    let exo = observability_staircase(&s_exo, &c_exo)?;
    let v = if exo.dim == q_exo {
        DMatrix::identity(q_exo, q_exo)
    } else {
        exo.transform.rows(0, exo.dim).into_owned()
    };
    let dim2 = v.nrows();

    let w = block_diag(&[&DMatrix::identity(n, n), &v]);
    let a_bar = block_diag(&[&agent.a, &(&v * &s_exo * v.transpose())]);
    let b_bar = vstack(&[&agent.b, &DMatrix::zeros(dim2, agent.m())]);
    let c_bar = hstack(&[&c_x, &(&c_exo * v.transpose())]);
    let dm_reduced = &d_exo * v.transpose();

    let full = observability_staircase(&a_bar, &c_bar)?;
    if full.dim < a_bar.nrows() {
        return Err(viol(format!(
            "reduced pair has only {} of {} observable modes (agent and exosystem modes cancel)",
            full.dim,
            a_bar.nrows()
        )));
    }

    Ok(ReducedModel {
        mode,
        w,
        a_bar,
        b_bar,
        c_bar,
        n_x: n,
        dim2,
        dm_reduced,
    })
}
