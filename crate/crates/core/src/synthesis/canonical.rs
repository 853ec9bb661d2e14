use nalgebra::DMatrix;

use super::{Result, SynthesisError};
use crate::ctlinalg::{left_inverse, rank, vstack, RANK_RTOL};

/// Pseudo-identical form `T Ā = (𝒜 + ℒ) T`, `C̄ = 𝒞 T` of one agent.
///
/// `T = [C̄; C̄Ā; …; C̄Ā^{n̄−1}]` has full column rank, `ℒ` is zero except for
/// its last block row `L = C̄ Ā^{n̄} T⁺`, and `ℬ = T B̄`.
#[derive(Clone, Debug)]
pub struct CanonicalModel {
    pub t: DMatrix<f64>,
    /// `T⁺ = (TᵀT)⁻¹Tᵀ`.
    pub t_pinv: DMatrix<f64>,
    /// Last block row of `ℒ` (`p × p n̄`).
    pub l: DMatrix<f64>,
    pub b_cal: DMatrix<f64>,
    pub nbar: usize,
    pub p: usize,
}

impl CanonicalModel {
    pub fn dim(&self) -> usize {
        self.p * self.nbar
    }

    pub fn acal(&self) -> DMatrix<f64> {
        shift_matrix(self.p, self.nbar)
    }

    pub fn ccal(&self) -> DMatrix<f64> {
        chain_output(self.p, self.nbar)
    }

    /// Full `ℒ` (`p n̄ × p n̄`).
    pub fn lcal(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut out = DMatrix::zeros(d, d);
        out.view_mut((d - self.p, 0), (self.p, d)).copy_from(&self.l);
        out
    }

    /// `𝒜 + ℒ`.
    pub fn drift(&self) -> DMatrix<f64> {
        self.acal() + self.lcal()
    }

    /// Last block row of `ℒ_ε`, `ε^{n̄+1} L S(ε) = L · diag(ε^{n̄} I, …, ε I)`.
    pub fn scaled_coupling(&self, eps: f64) -> DMatrix<f64> {
        let mut out = self.l.clone();
        for j in 0..self.nbar {
            let f = eps.powi((self.nbar - j) as i32);
            out.columns_mut(j * self.p, self.p).scale_mut(f);
        }
        out
    }
}

/// Block shift `𝒜`: identity blocks on the first block super-diagonal.
pub fn shift_matrix(p: usize, nbar: usize) -> DMatrix<f64> {
    let d = p * nbar;
    let mut a = DMatrix::zeros(d, d);
    for k in 0..d.saturating_sub(p) {
        a[(k, k + p)] = 1.0;
    }
    a
}

/// `𝒞 = [I_p, 0, …, 0]`.
pub fn chain_output(p: usize, nbar: usize) -> DMatrix<f64> {
    let mut c = DMatrix::zeros(p, p * nbar);
    for k in 0..p {
        c[(k, k)] = 1.0;
    }
    c
}

/// High-gain scaling `S(ε) = diag(ε⁻¹ I_p, ε⁻² I_p, …, ε^{−n̄} I_p)`.
pub fn scaling_matrix(eps: f64, p: usize, nbar: usize) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(p * nbar, p * nbar);
    for j in 0..nbar {
        let v = eps.powi(-(j as i32 + 1));
        for k in 0..p {
            s[(j * p + k, j * p + k)] = v;
        }
    }
    s
}

/// Builds the pseudo-identical form of `(Ā, B̄, C̄)` with chain length `nbar`.
///
/// `agent_index` is 1-based and only used in error messages.
pub fn pseudo_identical_form(
    a_bar: &DMatrix<f64>,
    b_bar: &DMatrix<f64>,
    c_bar: &DMatrix<f64>,
    nbar: usize,
    agent_index: usize,
) -> Result<CanonicalModel> {
    let n = a_bar.nrows();
    let p = c_bar.nrows();
    if a_bar.ncols() != n || c_bar.ncols() != n || b_bar.nrows() != n {
        return Err(SynthesisError::Dimension(format!(
            "agent {agent_index}: inconsistent (Ā, B̄, C̄) shapes"
        )));
    }

    let mut blocks = Vec::with_capacity(nbar);
    let mut row = c_bar.clone();
    for _ in 0..nbar {
        let next = &row * a_bar;
        blocks.push(row);
        row = next;
    }
    let refs: Vec<&DMatrix<f64>> = blocks.iter().collect();
    let t = if refs.is_empty() {
        DMatrix::zeros(0, n)
    } else {
        vstack(&refs)
    };

    let r = rank(&t, RANK_RTOL);
    if r < n {
        return Err(SynthesisError::RankDeficiency {
            agent: agent_index,
            rank: r,
            needed: n,
        });
    }
    let t_pinv = left_inverse(&t)?;
    let l = &row * &t_pinv;
    let b_cal = &t * b_bar;
    Ok(CanonicalModel {
        t,
        t_pinv,
        l,
        b_cal,
        nbar,
        p,
    })
}
