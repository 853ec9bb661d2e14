//! Control-theoretic numerical kernel.
//!
//! Dense, small-scale routines over `nalgebra::DMatrix<f64>`: structural tests
//! (observability, stabilizability, Hurwitz), the regulator (Sylvester plus
//! output) equations, Lyapunov and Riccati solvers, invariant zeros of the
//! Rosenbrock pencil and the orthogonal observability staircase.

mod lyapunov;
mod regulator;
mod riccati;
mod schur;
mod staircase;
mod structural;
mod zeros;

use nalgebra::{Complex, DMatrix};
use thiserror::Error;

pub use lyapunov::{solve_lyapunov, solve_lyapunov_unchecked};
pub use regulator::{regulator_residuals, solve_regulator, RegulatorSolution};
pub use riccati::{solve_care, solve_filter_are, AreSolution, OutputWeighting};
pub use schur::ordered_schur;
pub use staircase::{controllability_staircase, observability_staircase, Staircase};
pub use structural::{is_hurwitz, pbh_checks, spectral_abscissa, StructuralReport};
pub use zeros::{invariant_zeros, ZeroSet};

/// Relative threshold for every SVD rank decision.
pub const RANK_RTOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not Hurwitz (spectral abscissa {abscissa:.3e})")]
    NotHurwitz { abscissa: f64 },
    #[error("pair is not observable")]
    NotObservable,
    #[error("pair is not stabilizable")]
    NotStabilizable,
    #[error("regulator equations unsolvable: residual {residual:.3e} exceeds {limit:.3e}")]
    Unsolvable { residual: f64, limit: f64 },
    #[error("Riccati solver diverged: {0}")]
    SolverDivergence(String),
    #[error("singular linear system: {0}")]
    Singular(String),
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Eigenvalues of a real square matrix (empty for a 0x0 matrix).
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    m.clone().complex_eigenvalues().iter().copied().collect()
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn symmetric_extremes(m: &DMatrix<f64>) -> (f64, f64) {
    let sym = (m + m.transpose()) * 0.5;
    let ev = sym.symmetric_eigen().eigenvalues;
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Numerical rank with singular values below `rtol * sigma_max` treated as zero.
pub fn rank(m: &DMatrix<f64>, rtol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rtol * smax).count()
}

/// Rank with an absolute threshold.
pub(crate) fn rank_abs(m: &DMatrix<f64>, atol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    m.singular_values().iter().filter(|&&s| s > atol).count()
}

pub(crate) fn complex_rank_abs(m: &DMatrix<Complex<f64>>, atol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .filter(|&&s| s > atol)
        .count()
}

pub(crate) fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex<f64>> {
    m.map(|v| Complex::new(v, 0.0))
}

/// Block-diagonal concatenation.
pub fn block_diag(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Vertical stack of matrices sharing a column count.
pub fn vstack(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        debug_assert_eq!(b.ncols(), cols);
        out.view_mut((r, 0), (b.nrows(), cols)).copy_from(b);
        r += b.nrows();
    }
    out
}

/// Horizontal stack of matrices sharing a row count.
pub fn hstack(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        debug_assert_eq!(b.nrows(), rows);
        out.view_mut((0, c), (rows, b.ncols())).copy_from(b);
        c += b.ncols();
    }
    out
}

pub(crate) fn check_square(name: &str, m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(LinalgError::Dimension(format!(
            "{name} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

pub(crate) fn check_shape(name: &str, m: &DMatrix<f64>, rows: usize, cols: usize) -> Result<()> {
    if m.shape() != (rows, cols) {
        return Err(LinalgError::Dimension(format!(
            "{name} must be {rows}x{cols}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Moore-Penrose left inverse `(TᵀT)⁻¹Tᵀ` of a full-column-rank matrix.
pub fn left_inverse(t: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let gram = t.transpose() * t;
    let chol = gram
        .cholesky()
        .ok_or_else(|| LinalgError::Singular("TᵀT is not positive definite".into()))?;
    Ok(chol.solve(&t.transpose()))
}
