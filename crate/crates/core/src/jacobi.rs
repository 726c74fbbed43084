//! One-sided Jacobi SVD for complex matrices.
//!
//! `nalgebra`'s bidiagonal SVD occasionally returns factors that do not
//! reproduce the input (errors up to 1e-6 on random 3x3 complex matrices),
//! so the crate uses this routine for every singular value decomposition.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::DMatrix;
use num_complex::Complex64;

const MAX_SWEEPS: usize = 80;

/// Thin SVD `A = U diag(σ) V*` with `σ` descending. For an `m x n` input,
/// `U` is `m x k`, `V` is `n x k` and `k = min(m, n)`.
#[derive(Debug, Clone)]
pub(crate) struct Svd {
    pub u: DMatrix<Complex64>,
    pub singular_values: Vec<f64>,
    pub v: DMatrix<Complex64>,
}

pub(crate) fn svd(a: &DMatrix<Complex64>) -> Option<Svd> {
    if a.nrows() >= a.ncols() {
        tall_svd(a)
    } else {
        let t = tall_svd(&a.adjoint())?;
        Some(Svd { u: t.v, singular_values: t.singular_values, v: t.u })
    }
}

fn tall_svd(a: &DMatrix<Complex64>) -> Option<Svd> {
    let (m, n) = (a.nrows(), a.ncols());
    let mut w = a.clone();
    let mut v = DMatrix::<Complex64>::identity(n, n);
    let tol = f64::EPSILON * (m as f64).sqrt();
    // Rotations below this level only shuffle rounding noise.
    let floor = f64::EPSILON * f64::EPSILON * a.norm_squared();
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        converged = true;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dotc(&w.column(q));
                let g = gamma.norm();
                if g <= floor || g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                converged = false;
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s, phase);
                rotate(&mut v, p, q, c, s, phase);
            }
        }
    }
    if !converged {
        return None;
    }
    let norms: Vec<f64> = (0..n).map(|k| w.column(k).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let mut u = DMatrix::zeros(m, n);
    let mut vs = DMatrix::zeros(n, n);
    let mut singular_values = Vec::with_capacity(n);
    let mut filled = Vec::with_capacity(n);
    for (c, &k) in order.iter().enumerate() {
        let s = norms[k];
        singular_values.push(s);
        vs.set_column(c, &v.column(k));
        if s > 0.0 {
            u.set_column(c, &(w.column(k) / Complex64::new(s, 0.0)));
            filled.push(true);
        } else {
            filled.push(false);
        }
    }
    complete_columns(&mut u, &filled);
    Some(Svd { u, singular_values, v: vs })
}

/// `[x_p, x_q] ← [c x_p - s e x_q, s x_p + c e x_q]` with `e = phase`.
fn rotate(x: &mut DMatrix<Complex64>, p: usize, q: usize, c: f64, s: f64, phase: Complex64) {
    for i in 0..x.nrows() {
        let xp = x[(i, p)];
        let xq = x[(i, q)] * phase;
        x[(i, p)] = xp * c - xq * s;
        x[(i, q)] = xp * s + xq * c;
    }
}

/// Replaces unfilled columns by unit vectors orthogonal to all others
/// (Gram-Schmidt against the standard basis, applied twice).
fn complete_columns(u: &mut DMatrix<Complex64>, filled: &[bool]) {
    let m = u.nrows();
    let mut have: Vec<usize> = (0..filled.len()).filter(|&k| filled[k]).collect();
    let mut candidate = 0;
    for (k, &done) in filled.iter().enumerate() {
        if done {
            continue;
        }
        while candidate < m {
            let mut x = DMatrix::<Complex64>::zeros(m, 1);
            x[(candidate, 0)] = Complex64::new(1.0, 0.0);
            candidate += 1;
            for _ in 0..2 {
                for &h in &have {
                    let proj = u.column(h).dotc(&x.column(0));
                    let col = u.column(h) * proj;
                    x.column_mut(0).axpy(Complex64::new(-1.0, 0.0), &col, Complex64::new(1.0, 0.0));
                }
            }
            let nrm = x.norm();
            if nrm > 0.5 {
                u.set_column(k, &(x.column(0) / Complex64::new(nrm, 0.0)));
                have.push(k);
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn recompose(s: &Svd) -> DMatrix<Complex64> {
        let mut us = s.u.clone();
        for (k, &x) in s.singular_values.iter().enumerate() {
            for i in 0..us.nrows() {
                us[(i, k)] *= x;
            }
        }
        us * s.v.adjoint()
    }

    fn orth_residual(q: &DMatrix<Complex64>) -> f64 {
        (q.adjoint() * q - DMatrix::<Complex64>::identity(q.ncols(), q.ncols())).norm()
    }

    #[test]
    fn rank_deficient_completion() {
        let a = DMatrix::from_fn(4, 3, |i, j| Complex64::new((i + j) as f64, (i * j) as f64 * 0.0));
        let s = svd(&a).unwrap();
        assert!((recompose(&s) - &a).norm() < 1e-13);
        assert!(orth_residual(&s.u) < 1e-13 && orth_residual(&s.v) < 1e-13);
        assert!(s.singular_values[2] < 1e-13);
        let z = DMatrix::<Complex64>::zeros(3, 3);
        let s = svd(&z).unwrap();
        assert!(orth_residual(&s.u) < 1e-15);
    }

    #[test]
    fn noise_columns_converge() {
        for scale in [1e-14, 1e-17, 1e-200] {
            let a = DMatrix::from_fn(8, 4, |i, j| {
                let x = ((i * 7 + j * 13) % 11) as f64 - 5.0;
                Complex64::new(x * scale, (x * x - 3.0) * scale)
            });
            let s = svd(&a).unwrap();
            assert!((recompose(&s) - &a).norm() <= 1e-13 * a.norm());
        }
    }

    proptest! {
        #[test]
        fn reconstructs(m in 1usize..7, n in 1usize..7, seed in proptest::collection::vec(-1.0f64..1.0, 72)) {
            let a = DMatrix::from_fn(m, n, |i, j| Complex64::new(seed[i * 6 + j], seed[36 + i * 6 + j]));
            let s = svd(&a).unwrap();
            prop_assert!((recompose(&s) - &a).norm() <= 1e-13 * a.norm().max(1.0));
            prop_assert!(orth_residual(&s.u) <= 1e-13);
            prop_assert!(orth_residual(&s.v) <= 1e-13);
            prop_assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}
