use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use super::{
    check_shape, check_square, controllability_staircase, eigenvalues, observability_staircase,
    Result,
};

/// Closed right-half-plane membership threshold for "unstable" eigenvalues.
const RHP_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct StructuralReport {
    /// `None` when no output matrix was supplied.
    pub observable: Option<bool>,
    /// `None` when no input matrix was supplied.
    pub stabilizable: Option<bool>,
    pub hurwitz: bool,
    /// Largest real part over the spectrum of `A`; `hurwitz` iff this is negative.
    pub spectral_abscissa: f64,
    /// Eigenvalues at which a PBH rank test fails: unobservable modes and
    /// uncontrollable modes in the closed right-half plane.
    #[serde(skip)]
    pub rank_defect_eigenvalues: Vec<Complex<f64>>,
}

/// Largest real part of the spectrum (`-inf` for an empty matrix).
pub fn spectral_abscissa(a: &DMatrix<f64>) -> f64 {
    eigenvalues(a)
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn is_hurwitz(a: &DMatrix<f64>) -> bool {
    spectral_abscissa(a) < 0.0
}

/// Observability, stabilizability and Hurwitz tests for `A` with optional `B`, `C`.
///
/// The PBH conditions are evaluated through the orthogonal staircase forms:
/// `rank [A - λI; C] < n` exactly at the eigenvalues of the unobservable block,
/// and `rank [A - λI, B] < n` exactly at the eigenvalues of the uncontrollable
/// block, which avoids rank decisions at numerically perturbed eigenvalues.
pub fn pbh_checks(
    a: &DMatrix<f64>,
    b: Option<&DMatrix<f64>>,
    c: Option<&DMatrix<f64>>,
) -> Result<StructuralReport> {
    check_square("A", a)?;
    let n = a.nrows();
    let mut defects = Vec::new();

    let observable = match c {
        Some(c) => {
            check_shape("C", c, c.nrows(), n)?;
            let st = observability_staircase(a, c)?;
            defects.extend(eigenvalues(&st.trailing_block()));
            Some(st.dim == n)
        }
        None => None,
    };

    let stabilizable = match b {
        Some(b) => {
            check_shape("B", b, n, b.ncols())?;
            let st = controllability_staircase(a, b)?;
            let bad: Vec<_> = eigenvalues(&st.trailing_block())
                .into_iter()
                .filter(|l| l.re >= -RHP_TOL)
                .collect();
            let ok = bad.is_empty();
            defects.extend(bad);
            Some(ok)
        }
        None => None,
    };

    let abscissa = spectral_abscissa(a);
    Ok(StructuralReport {
        observable,
        stabilizable,
        hurwitz: abscissa < 0.0,
        spectral_abscissa: abscissa,
        rank_defect_eigenvalues: defects,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(r: usize, c: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(r, c, v)
    }

    #[test]
    fn damped_oscillator_is_observable_from_position() {
        let a = m(2, 2, &[0.0, 1.0, -2.0, -2.0]);
        let c = m(1, 2, &[1.0, 0.0]);
        let rep = pbh_checks(&a, None, Some(&c)).unwrap();
        assert_eq!(rep.observable, Some(true));
        assert!(rep.hurwitz);
        assert!(rep.stabilizable.is_none());
    }

    #[test]
    fn scalar_zero_without_input_is_not_stabilizable() {
        let a = m(1, 1, &[0.0]);
        let b = m(1, 1, &[0.0]);
        let rep = pbh_checks(&a, Some(&b), None).unwrap();
        assert_eq!(rep.stabilizable, Some(false));
        assert_eq!(rep.rank_defect_eigenvalues.len(), 1);
        assert!(!rep.hurwitz);
    }

    #[test]
    fn split_unstable_modes_are_stabilizable_through_shared_input() {
        let a = m(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let b = m(2, 1, &[1.0, 1.0]);
        let rep = pbh_checks(&a, Some(&b), None).unwrap();
        assert_eq!(rep.stabilizable, Some(true));
    }

    #[test]
    fn stable_uncontrollable_mode_is_tolerated() {
        let a = m(2, 2, &[1.0, 0.0, 0.0, -3.0]);
        let b = m(2, 1, &[1.0, 0.0]);
        let rep = pbh_checks(&a, Some(&b), None).unwrap();
        assert_eq!(rep.stabilizable, Some(true));
    }

    #[test]
    fn rejects_mismatched_shapes() {
        let a = m(2, 2, &[0.0; 4]);
        let c = m(1, 3, &[0.0; 3]);
        assert!(pbh_checks(&a, None, Some(&c)).is_err());
    }
}
