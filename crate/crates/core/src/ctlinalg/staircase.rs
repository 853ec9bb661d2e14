use nalgebra::DMatrix;

use super::{check_shape, check_square, hstack, rank_abs, Result, RANK_RTOL};

/// Orthogonal staircase decomposition.
///
/// For the controllability form, `transform` is an orthogonal `Z` with
/// `Zᵀ A Z = [[A_c, *], [0, A_u]]` and `Zᵀ B = [B_c; 0]`, where the leading
/// `dim` coordinates are the controllable part. For the observability form,
/// `transform` is `W = Zᵀ` of the dual problem, so `W A Wᵀ = [[A_o, 0], [*, A_u]]`
/// and `C Wᵀ = [C_o, 0]`.
#[derive(Clone, Debug)]
pub struct Staircase {
    pub transform: DMatrix<f64>,
    pub dim: usize,
    /// Transformed state matrix.
    pub a: DMatrix<f64>,
}

impl Staircase {
    /// Leading (controllable / observable) diagonal block.
    pub fn leading_block(&self) -> DMatrix<f64> {
        self.a.view((0, 0), (self.dim, self.dim)).into_owned()
    }

    /// Trailing (uncontrollable / unobservable) diagonal block.
    pub fn trailing_block(&self) -> DMatrix<f64> {
        let n = self.a.nrows();
        self.a
            .view((self.dim, self.dim), (n - self.dim, n - self.dim))
            .into_owned()
    }
}

fn scale_of(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.norm().max(b.norm()).max(1.0)
}

/// Controllability staircase of `(A, B)` via repeated SVD column compressions.
pub fn controllability_staircase(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Staircase> {
    check_square("A", a)?;
    let n = a.nrows();
    check_shape("B", b, n, b.ncols())?;
    let tol = RANK_RTOL * scale_of(a, b);

    let mut z = DMatrix::<f64>::identity(n, n);
    let mut at = a.clone();
    let mut done = 0usize;
    // the block that drives the not-yet-reached coordinates
    let mut drive = b.clone();

    while done < n {
        let rem = n - done;
        if drive.ncols() == 0 {
            break;
        }
        let r = rank_abs(&drive, tol);
        if r == 0 {
            break;
        }
        let range = dominant_left_vectors(&drive, r);
        let u_full = complete_orthonormal(&range);
        let mut block = DMatrix::<f64>::identity(n, n);
        block.view_mut((done, done), (rem, rem)).copy_from(&u_full);
        at = block.transpose() * &at * &block;
        z = &z * &block;
        if r == rem {
            done = n;
            break;
        }
        drive = at.view((done + r, done), (rem - r, r)).into_owned();
        done += r;
    }
    Ok(Staircase {
        transform: z,
        dim: done,
        a: at,
    })
}

/// Observability staircase of `(A, C)`: the observable part is isolated in the
/// leading `dim` coordinates of `W x`.
pub fn observability_staircase(a: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<Staircase> {
    check_square("A", a)?;
    check_shape("C", c, c.nrows(), a.nrows())?;
    let dual = controllability_staircase(&a.transpose(), &c.transpose())?;
    Ok(Staircase {
        transform: dual.transform.transpose(),
        dim: dual.dim,
        a: dual.a.transpose(),
    })
}

/// Left singular vectors for the `r` largest singular values of `m`.
pub(crate) fn dominant_left_vectors(m: &DMatrix<f64>, r: usize) -> DMatrix<f64> {
    if r == 0 || m.is_empty() {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("u requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let mut out = DMatrix::zeros(m.nrows(), r);
    for (slot, &idx) in order.iter().take(r).enumerate() {
        out.set_column(slot, &u.column(idx));
    }
    out
}

/// Extend orthonormal columns `q` (k columns in R^m) to an m x m orthogonal
/// matrix whose leading k columns are `q`.
pub(crate) fn complete_orthonormal(q: &DMatrix<f64>) -> DMatrix<f64> {
    let m = q.nrows();
    let k = q.ncols();
    if k == m {
        return q.clone();
    }
    // Householder QR of [q | I]: the trailing m − k columns of its Q factor
    // are orthonormal and orthogonal to span(q)
    let aug = hstack(&[q, &DMatrix::identity(m, m)]);
    let qf = aug.qr().q();
    let mut out = DMatrix::zeros(m, m);
    out.columns_mut(0, k).copy_from(q);
    for j in k..m {
        // one reorthogonalization pass against q keeps the result orthogonal
        // to working precision even for nearly dependent q
        let mut v = qf.column(j).into_owned();
        v -= q * (q.transpose() * &v);
        let nv = v.norm();
        out.set_column(j, &(v / nv));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctlinalg::eigenvalues;

    #[test]
    fn diag_with_partial_output_keeps_observed_mode() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let c = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let st = observability_staircase(&a, &c).unwrap();
        assert_eq!(st.dim, 1);
        let kept = eigenvalues(&st.leading_block());
        assert!((kept[0].re - 1.0).abs() < 1e-12 && kept[0].im.abs() < 1e-12);
        // unobservable coordinates invisible to C
        let ct = &c * st.transform.transpose();
        assert!(ct[(0, 1)].abs() < 1e-14);
    }

    #[test]
    fn completion_is_orthogonal() {
        let q = DMatrix::from_column_slice(2, 1, &[-0.7941690962655281, -0.6076968376886579]);
        let full = complete_orthonormal(&q);
        assert_eq!(full.column(0), q.column(0));
        let err = (full.transpose() * &full - DMatrix::<f64>::identity(2, 2)).amax();
        assert!(err < 1e-15, "{err}");

        let q = dominant_left_vectors(&DMatrix::from_row_slice(5, 2, &[1., 2., 3., 4., 5., 6., 7., 8., 9., 1.]), 2);
        let full = complete_orthonormal(&q);
        assert!((full.transpose() * &full - DMatrix::<f64>::identity(5, 5)).amax() < 1e-14);
    }

    #[test]
    fn observable_pair_is_full() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -2.0, -2.0]);
        let c = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let st = observability_staircase(&a, &c).unwrap();
        assert_eq!(st.dim, 2);
    }

    #[test]
    fn zero_output_gives_nothing_observable() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let c = DMatrix::zeros(1, 2);
        assert_eq!(observability_staircase(&a, &c).unwrap().dim, 0);
    }

    #[test]
    fn transform_is_orthogonal_and_upper_right_vanishes() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 3.0]);
        let c = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let st = observability_staircase(&a, &c).unwrap();
        assert_eq!(st.dim, 2);
        let w = &st.transform;
        assert!((w * w.transpose() - DMatrix::identity(3, 3)).norm() < 1e-12);
        assert!(st.a.view((0, 2), (2, 1)).norm() < 1e-12);
    }
}
