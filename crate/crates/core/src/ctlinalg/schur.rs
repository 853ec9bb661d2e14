use nalgebra::{Complex, DMatrix, DVector, Schur};

use super::{LinalgError, Result};

const MAX_SCHUR_ITERS: usize = 10_000;

/// Real Schur form `H = Q T Qᵀ` reordered so that the eigenvalues accepted by
/// `select` occupy the leading diagonal blocks.
///
/// Returns `(Q, T, k)` where the first `k` columns of `Q` span the invariant
/// subspace of the selected eigenvalues. Adjacent 1x1/2x2 blocks are exchanged
/// by solving the small Sylvester equation `T11 X − X T22 = T12` and applying
/// the orthogonal factor of `[−X; I]`.
pub fn ordered_schur(
    h: &DMatrix<f64>,
    select: impl Fn(Complex<f64>) -> bool,
) -> Result<(DMatrix<f64>, DMatrix<f64>, usize)> {
    let n = h.nrows();
    let schur = Schur::try_new(h.clone(), f64::EPSILON, MAX_SCHUR_ITERS)
        .ok_or_else(|| LinalgError::SolverDivergence("Schur iteration did not converge".into()))?;
    let (mut q, mut t) = schur.unpack();

    clean_subdiagonal(&mut t);
    split_real_pairs(&mut t, &mut q);

    // bubble selected blocks to the top
    loop {
        let blocks = block_starts(&t);
        let mut swapped = false;
        for w in blocks.windows(2) {
            let (s0, p) = w[0];
            let (s1, r) = w[1];
            debug_assert_eq!(s0 + p, s1);
            let first_sel = select(block_eig(&t, s0, p));
            let second_sel = select(block_eig(&t, s1, r));
            if !first_sel && second_sel {
                swap_blocks(&mut t, &mut q, s0, p, r)?;
                swapped = true;
                break;
            }
        }
        if !swapped {
            break;
        }
    }

    let k = block_starts(&t)
        .into_iter()
        .take_while(|&(s, p)| select(block_eig(&t, s, p)))
        .map(|(_, p)| p)
        .sum();
    debug_assert!(k <= n);
    Ok((q, t, k))
}

fn clean_subdiagonal(t: &mut DMatrix<f64>) {
    let n = t.nrows();
    for j in 0..n {
        for i in (j + 2)..n {
            t[(i, j)] = 0.0;
        }
    }
    for i in 0..n.saturating_sub(1) {
        let sub = t[(i + 1, i)].abs();
        if sub <= f64::EPSILON * (t[(i, i)].abs() + t[(i + 1, i + 1)].abs()) {
            t[(i + 1, i)] = 0.0;
        }
    }
}

/// Triangularize any 2x2 diagonal block whose eigenvalues are real.
fn split_real_pairs(t: &mut DMatrix<f64>, q: &mut DMatrix<f64>) {
    let n = t.nrows();
    let mut i = 0;
    while i + 1 < n {
        if t[(i + 1, i)] == 0.0 {
            i += 1;
            continue;
        }
        let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
        let tr = a + d;
        let disc = (a - d) * (a - d) / 4.0 + b * c;
        if disc >= 0.0 {
            // eigenvector for λ = tr/2 + sqrt(disc), from whichever row is better scaled
            let lambda = tr / 2.0 + disc.sqrt();
            let (r0, r1) = ((b, lambda - a), (lambda - d, c));
            let (v0, v1) = if r0.0.hypot(r0.1) >= r1.0.hypot(r1.1) { r0 } else { r1 };
            let nrm = v0.hypot(v1);
            let (cs, sn) = (v0 / nrm, v1 / nrm);
            let rot = DMatrix::from_row_slice(2, 2, &[cs, -sn, sn, cs]);
            apply_local(t, q, i, &rot);
            t[(i + 1, i)] = 0.0;
            i += 1;
        } else {
            i += 2;
        }
    }
}

fn block_starts(t: &DMatrix<f64>) -> Vec<(usize, usize)> {
    let n = t.nrows();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != 0.0 {
            out.push((i, 2));
            i += 2;
        } else {
            out.push((i, 1));
            i += 1;
        }
    }
    out
}

/// One representative eigenvalue of a diagonal block (blocks are real or a
/// complex-conjugate pair, which share their real part).
fn block_eig(t: &DMatrix<f64>, s: usize, size: usize) -> Complex<f64> {
    if size == 1 {
        return Complex::new(t[(s, s)], 0.0);
    }
    let (a, b, c, d) = (t[(s, s)], t[(s, s + 1)], t[(s + 1, s)], t[(s + 1, s + 1)]);
    let disc = (a - d) * (a - d) / 4.0 + b * c;
    Complex::new((a + d) / 2.0, (-disc).max(0.0).sqrt())
}

/// Similarity `T ← Gᵀ T G`, `Q ← Q G` with `G` acting on rows/cols `s..s+g.nrows()`.
fn apply_local(t: &mut DMatrix<f64>, q: &mut DMatrix<f64>, s: usize, g: &DMatrix<f64>) {
    let k = g.nrows();
    let n = t.nrows();
    let rows = g.transpose() * t.view((s, 0), (k, n));
    t.view_mut((s, 0), (k, n)).copy_from(&rows);
    let cols = t.view((0, s), (n, k)) * g;
    t.view_mut((0, s), (n, k)).copy_from(&cols);
    let qc = q.view((0, s), (n, k)) * g;
    q.view_mut((0, s), (n, k)).copy_from(&qc);
}

fn swap_blocks(t: &mut DMatrix<f64>, q: &mut DMatrix<f64>, s: usize, p: usize, r: usize) -> Result<()> {
    let t11 = t.view((s, s), (p, p)).into_owned();
    let t12 = t.view((s, s + p), (p, r)).into_owned();
    let t22 = t.view((s + p, s + p), (r, r)).into_owned();

    // T11 X − X T22 = T12  ⇔  (I ⊗ T11 − T22ᵀ ⊗ I) vec X = vec T12
    let k = DMatrix::<f64>::identity(r, r).kronecker(&t11)
        - t22.transpose().kronecker(&DMatrix::<f64>::identity(p, p));
    let x = k
        .lu()
        .solve(&DVector::from_column_slice(t12.as_slice()))
        .ok_or_else(|| LinalgError::Singular("cannot swap blocks with a shared eigenvalue".into()))?;
    let x = DMatrix::from_column_slice(p, r, x.as_slice());

    // [−X I_p; I_r 0] is nonsingular and its leading r columns span the
    // T22-invariant subspace of the local 2x2 block triangle
    let m = p + r;
    let mut basis = DMatrix::<f64>::zeros(m, m);
    basis.view_mut((0, 0), (p, r)).copy_from(&(-&x));
    basis.view_mut((p, 0), (r, r)).fill_with_identity();
    basis.view_mut((0, r), (p, p)).fill_with_identity();
    let g = basis.qr().q();

    apply_local(t, q, s, &g);
    // exact zeros below the new leading block
    t.view_mut((s + r, s), (p, r)).fill(0.0);
    if r == 1 && p == 1 {
        return Ok(());
    }
    clean_subdiagonal(t);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moves_stable_eigenvalues_first() {
        let h = DMatrix::from_row_slice(
            4,
            4,
            &[
                2.0, 1.0, 0.0, 0.3, //
                0.0, -1.0, 4.0, 0.0, //
                0.5, -4.0, -1.0, 1.0, //
                0.0, 0.2, 0.0, 3.0,
            ],
        );
        let (q, t, k) = ordered_schur(&h, |l| l.re < 0.0).unwrap();
        assert!((&q * &t * q.transpose() - &h).norm() < 1e-10);
        assert!((q.transpose() * &q - DMatrix::identity(4, 4)).norm() < 1e-12);
        // the leading block carries exactly the stable eigenvalues
        let lead = t.view((0, 0), (k, k)).into_owned();
        let ev = super::super::eigenvalues(&lead);
        assert!(ev.iter().all(|l| l.re < 0.0));
        let rest = t.view((k, k), (4 - k, 4 - k)).into_owned();
        assert!(super::super::eigenvalues(&rest).iter().all(|l| l.re >= 0.0));
        assert!(t.view((k, 0), (4 - k, k)).norm() < 1e-10);
    }
}
