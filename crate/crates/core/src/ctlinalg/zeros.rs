use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use super::staircase::{complete_orthonormal, dominant_left_vectors};
use super::{
    check_shape, check_square, complex_rank_abs, eigenvalues, hstack, rank_abs, to_complex,
    vstack, Result, RANK_RTOL,
};

#[derive(Clone, Debug, Serialize)]
pub struct ZeroSet {
    #[serde(serialize_with = "serialize_complex")]
    pub zeros: Vec<Complex<f64>>,
    pub right_invertible: bool,
}

fn serialize_complex<S: serde::Serializer>(z: &[Complex<f64>], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(z.len()))?;
    for v in z {
        seq.serialize_element(&[v.re, v.im])?;
    }
    seq.end()
}

/// State-space quadruple `(A, B, C, D)` of the Rosenbrock pencil
/// `[[A − sI, B], [C, D]]`.
#[derive(Clone, Debug)]
struct Quad {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
}

impl Quad {
    fn n(&self) -> usize {
        self.a.nrows()
    }

    fn dual(&self) -> Quad {
        Quad {
            a: self.a.transpose(),
            b: self.c.transpose(),
            c: self.b.transpose(),
            d: self.d.transpose(),
        }
    }
}

/// Invariant zeros of `ẋ = Ax + Bu`, `e = Dx`, i.e. the finite values of `s`
/// where `[[A − sI, B], [D, 0]]` drops below its normal rank.
///
/// The pencil is deflated with orthogonal transformations until the
/// feedthrough block is square and invertible (alternating the reduction on
/// the system and on its dual), after which the remaining regular pencil is
/// solved directly. Every rank decision uses an absolute threshold
/// `1e-10 · max(1, ‖[A B; D 0]‖)`.
pub fn invariant_zeros(a: &DMatrix<f64>, b: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<ZeroSet> {
    check_square("A", a)?;
    let n = a.nrows();
    check_shape("B", b, n, b.ncols())?;
    check_shape("D", d, d.nrows(), n)?;
    let (m, p) = (b.ncols(), d.nrows());

    let tol = RANK_RTOL * (a.norm_squared() + b.norm_squared() + d.norm_squared()).sqrt().max(1.0);
    let right_invertible = normal_rank(a, b, d, tol) == n + p;

    let mut sys = Quad {
        a: a.clone(),
        b: b.clone(),
        c: d.clone(),
        d: DMatrix::zeros(p, m),
    };
    for _ in 0..=2 * (n + 1) {
        let before = (sys.n(), sys.c.nrows(), sys.b.ncols());
        sys = reduce(sys, tol);
        sys = reduce(sys.dual(), tol).dual();
        let square = sys.d.nrows() == sys.d.ncols() && rank_abs(&sys.d, tol) == sys.d.nrows();
        if square || before == (sys.n(), sys.c.nrows(), sys.b.ncols()) {
            break;
        }
    }

    let zeros = finite_pencil_eigenvalues(&sys, tol);
    Ok(ZeroSet {
        zeros,
        right_invertible,
    })
}

/// Normal rank of the pencil, as the largest rank over a few fixed sample points.
fn normal_rank(a: &DMatrix<f64>, b: &DMatrix<f64>, d: &DMatrix<f64>, tol: f64) -> usize {
    let n = a.nrows();
    let (m, p) = (b.ncols(), d.nrows());
    let mut base = DMatrix::<f64>::zeros(n + p, n + m);
    base.view_mut((0, 0), (n, n)).copy_from(a);
    base.view_mut((0, n), (n, m)).copy_from(b);
    base.view_mut((n, 0), (p, n)).copy_from(d);
    let base = to_complex(&base);
    [
        Complex::new(0.618_034, 1.324_718),
        Complex::new(-1.137_5, 0.271_828),
        Complex::new(2.213_459, -0.577_921),
    ]
    .iter()
    .map(|&s| {
        let mut m = base.clone();
        for k in 0..n {
            m[(k, k)] -= s;
        }
        complex_rank_abs(&m, tol)
    })
    .max()
    .unwrap_or(0)
}

/// Deflates the pencil until the feedthrough block has full row rank.
///
/// One step: rotate the outputs so that `D = [D̃; 0]`, then rotate the state so
/// that the rows of `C` beneath the zero block read `[0, C₂₂]` with `C₂₂` of full
/// column rank `μ`. Those rows pin the last `μ` state coordinates through a
/// constant invertible block, so they and the coordinates can be removed by
/// unimodular operations, leaving
/// `(A₁₁, B₁, [A₂₁; C̃₁], [B₂; D̃])`.
fn reduce(mut sys: Quad, tol: f64) -> Quad {
    loop {
        let (n, p) = (sys.n(), sys.c.nrows());
        let m = sys.b.ncols();
        if p == 0 {
            return sys;
        }
        let rho = rank_abs(&sys.d, tol);
        if rho == p {
            return sys;
        }
        let u = complete_orthonormal(&dominant_left_vectors(&sys.d, rho));
        let ut = u.transpose();
        let d_rot = &ut * &sys.d;
        let c_rot = &ut * &sys.c;
        let d_top = d_rot.rows(0, rho).into_owned();
        let c_top = c_rot.rows(0, rho).into_owned();
        let c_bot = c_rot.rows(rho, p - rho).into_owned();

        let mu = rank_abs(&c_bot, tol);
        if mu == 0 || n == 0 {
            // identically vanishing output rows carry no zero information
            sys = Quad {
                a: sys.a,
                b: sys.b,
                c: c_top,
                d: d_top,
            };
            continue;
        }

        // V = [complement, row space of C_bot] so that C_bot V = [0, C₂₂]
        let row_space = dominant_left_vectors(&c_bot.transpose(), mu);
        let full = complete_orthonormal(&row_space);
        let v = hstack(&[&full.columns(mu, n - mu).into_owned(), &row_space]);
        let a_v = v.transpose() * &sys.a * &v;
        let b_v = v.transpose() * &sys.b;
        let c_v = &c_top * &v;
        let n1 = n - mu;

        sys = Quad {
            a: a_v.view((0, 0), (n1, n1)).into_owned(),
            b: b_v.rows(0, n1).into_owned(),
            c: vstack(&[
                &a_v.view((n1, 0), (mu, n1)).into_owned(),
                &c_v.columns(0, n1).into_owned(),
            ]),
            d: vstack(&[&b_v.rows(n1, mu).into_owned(), &d_top]),
        };
        debug_assert_eq!(sys.d.ncols(), m);
    }
}

/// Finite generalized eigenvalues of the deflated pencil.
///
/// `[C D]` is column-compressed to `[0, D']` by an orthogonal `V`; the leading
/// `n` columns of `[[A, B], [I, 0]] V` then give a square pencil `M − sN`.
fn finite_pencil_eigenvalues(sys: &Quad, tol: f64) -> Vec<Complex<f64>> {
    let n = sys.n();
    if n == 0 {
        return Vec::new();
    }
    let (p, m) = sys.d.shape();
    let cd = hstack(&[&sys.c, &sys.d]);
    let r = rank_abs(&cd, tol);
    let v = if r == 0 {
        DMatrix::identity(n + m, n + m)
    } else {
        let row_space = dominant_left_vectors(&cd.transpose(), r);
        let full = complete_orthonormal(&row_space);
        hstack(&[&full.columns(r, n + m - r).into_owned(), &row_space])
    };
    let k = n + m - r;
    debug_assert!(p >= r);
    let ab = hstack(&[&sys.a, &sys.b]);
    let eye0 = hstack(&[&DMatrix::identity(n, n), &DMatrix::zeros(n, m)]);
    let mm = (&ab * &v).columns(0, k.min(n + m)).into_owned();
    let nn = (&eye0 * &v).columns(0, k.min(n + m)).into_owned();
    if mm.ncols() != n {
        // non-square remainder: no regular part to report
        return Vec::new();
    }

    let sv = nn.singular_values();
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if smin > 1e-8 {
        if let Some(x) = nn.clone().lu().solve(&mm) {
            return eigenvalues(&x);
        }
    }
    // shift-invert: eig((M − σN)⁻¹ N) = 1/(s − σ); infinite eigenvalues map to 0
    let sigma = 0.754_877_666;
    let shifted = &mm - &nn * sigma;
    let Some(x) = shifted.lu().solve(&nn) else {
        return Vec::new();
    };
    let scale = x.norm().max(1.0);
    eigenvalues(&x)
        .into_iter()
        .filter(|mu| mu.norm() > 1e-10 * scale)
        .map(|mu| Complex::new(sigma, 0.0) + mu.inv())
        .collect()
}
