#![allow(dead_code)]

use coreg_core::nalgebra::{Complex, DMatrix};
use rand::Rng;

pub fn random_matrix(rng: &mut impl Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

/// Well-conditioned random similarity `I + 0.3 X`.
pub fn random_similarity(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    DMatrix::identity(n, n) + random_matrix(rng, n, n) * 0.3
}

/// Largest distance from a point of `a` to its greedily matched partner in
/// `b`, relative to `max(1, |z|)`; infinite when the counts differ.
pub fn spectrum_distance(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut left: Vec<Complex<f64>> = b.to_vec();
    let mut worst = 0.0_f64;
    for z in a {
        let (k, d) = left
            .iter()
            .enumerate()
            .map(|(k, w)| (k, (z - w).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("same length");
        worst = worst.max(d / z.norm().max(1.0));
        left.swap_remove(k);
    }
    worst
}

/// Random regulator problem `(A, B, R, E, D, Dm)` with `m ≥ p`.
pub struct RegulatorInstance {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub e: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub dm: DMatrix<f64>,
}

pub fn random_regulator(rng: &mut impl Rng) -> RegulatorInstance {
    let n = rng.random_range(1..=5);
    let p = rng.random_range(1..=2.min(n));
    let m = rng.random_range(p..=p + 1);
    let q = rng.random_range(1..=4);
    RegulatorInstance {
        a: random_matrix(rng, n, n),
        b: random_matrix(rng, n, m),
        r: random_matrix(rng, n, q),
        e: random_matrix(rng, q, q),
        d: random_matrix(rng, p, n),
        dm: random_matrix(rng, p, q),
    }
}
