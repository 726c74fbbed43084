//! Seeded generators for example and random instances.
//!
//! A matrix lies in `C(1,r)` exactly when its singular values lie in
//! `[r, 1]`, and in the exact class when they lie in `{r, 1}`. The random
//! generators build members from an SVD with prescribed singular values.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::classes::{classify, validate_radius, OperatorTuple};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, Tolerances};
use crate::Complex64;

/// Deterministic generator used by every seeded routine.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `r^{1/(2n)} I` on `C^dim`.
pub fn gen_scalar_family(n: u32, r: f64, dim: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("scalar family index must be positive"));
    }
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be positive"));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidRadius(r));
    }
    Ok(ComplexMatrix::identity(dim).scale_real(r.powf(1.0 / (2.0 * n as f64))))
}

/// Parameters of the cyclic weighted shift on `e_{-N}, …, e_N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SarasonShift {
    pub alpha: f64,
    pub r: f64,
    pub half_width: usize,
}

/// `α_n = sqrt((1 + r^{2(α+n+1)}) / (1 + r^{2(α+n)}))`.
pub fn sarason_weight(alpha: f64, r: f64, n: i64) -> f64 {
    let a = r.powf(2.0 * (alpha + n as f64));
    let b = r.powf(2.0 * (alpha + n as f64 + 1.0));
    ((1.0 + b) / (1.0 + a)).sqrt()
}

impl SarasonShift {
    pub fn new(alpha: f64, r: f64, half_width: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidParameter("sarason alpha must lie in [0, 1)"));
        }
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidRadius(r));
        }
        if half_width == 0 {
            return Err(Error::InvalidParameter("sarason half-width must be positive"));
        }
        Ok(Self { alpha, r, half_width })
    }

    pub fn dim(&self) -> usize {
        2 * self.half_width + 1
    }

    /// `α_{-N}, …, α_{N-1}` followed by the wrap weight `√r`.
    pub fn weights(&self) -> Vec<f64> {
        let n = self.half_width as i64;
        let mut w: Vec<f64> = (-n..n).map(|k| sarason_weight(self.alpha, self.r, k)).collect();
        w.push(self.r.sqrt());
        w
    }

    /// `e_n ↦ α_n e_{n+1}` for `n < N` and `e_N ↦ √r e_{-N}`.
    pub fn matrix(&self) -> ComplexMatrix {
        let dim = self.dim();
        let w = self.weights();
        ComplexMatrix::from_fn(dim, |i, j| {
            if i == (j + 1) % dim {
                Complex64::new(w[j], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }
}

pub fn gen_sarason(shift: &SarasonShift) -> ComplexMatrix {
    shift.matrix()
}

fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) / core::f64::consts::SQRT_2
    })
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the
/// phases of `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let qr = gaussian_matrix(rng, dim).qr();
    let mut q = qr.q();
    let rmat = qr.r();
    for k in 0..dim {
        let d = rmat[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, k)] *= phase;
        }
    }
    ComplexMatrix::from_dmatrix_unchecked(q)
}

/// `W diag(σ) Y*` with independent Haar `W`, `Y`.
pub fn with_singular_values<R: Rng + ?Sized>(rng: &mut R, sigma: &[f64]) -> ComplexMatrix {
    let dim = sigma.len();
    let w = haar_unitary(rng, dim);
    let y = haar_unitary(rng, dim);
    &(&w * &ComplexMatrix::from_real_diagonal(sigma)) * &y.adjoint()
}

/// Doubly commuting normal tuple `T_j = Q diag(e^{iθ} λ) Q*` with a shared
/// Haar `Q` and moduli `λ ∈ [r + 0.01, 0.99]`.
pub fn gen_normal_tuple(seed: u64, d: usize, dim: usize, r: f64, tol: &Tolerances) -> Result<OperatorTuple> {
    validate_radius(r, tol)?;
    if r + 0.01 >= 0.99 {
        return Err(Error::InvalidRadius(r));
    }
    if d == 0 || dim == 0 {
        return Err(Error::InvalidParameter("tuple length and dimension must be positive"));
    }
    let mut rng = rng_from_seed(seed);
    let q = haar_unitary(&mut rng, dim);
    let qs = q.adjoint();
    let ops = (0..d)
        .map(|_| {
            let diag: Vec<Complex64> = (0..dim)
                .map(|_| {
                    let lambda = rng.random_range(r + 0.01..=0.99);
                    let theta = rng.random_range(0.0..core::f64::consts::TAU);
                    Complex64::from_polar(lambda, theta)
                })
                .collect();
            &(&q * &ComplexMatrix::from_diagonal(&diag)) * &qs
        })
        .collect();
    OperatorTuple::new(r, ops, tol)
}

/// `T_j = I ⊗ … ⊗ A_j ⊗ … ⊗ I`.
pub fn gen_tensor_tuple(factors: &[ComplexMatrix], r: f64, tol: &Tolerances) -> Result<OperatorTuple> {
    if factors.is_empty() {
        return Err(Error::EmptyTuple);
    }
    for (index, a) in factors.iter().enumerate() {
        let cert = classify(a, r, tol)?.c1r;
        if !cert.member {
            let witness = cert.witness_norms.0.max(cert.witness_norms.1);
            return Err(Error::NotMember { index, class: "C1r", witness });
        }
    }
    let ops = (0..factors.len())
        .map(|j| {
            factors.iter().enumerate().fold(ComplexMatrix::identity(1), |acc, (k, a)| {
                if k == j {
                    acc.kron(a)
                } else {
                    acc.kron(&ComplexMatrix::identity(a.dim()))
                }
            })
        })
        .collect();
    OperatorTuple::new(r, ops, tol)
}

/// The Sarason shift tensored with the first scalar family member, the
/// default non-normal doubly commuting pair.
pub fn default_tensor_factors(r: f64, half_width: usize, scalar_dim: usize) -> Result<Vec<ComplexMatrix>> {
    let s = SarasonShift::new(0.3, r, half_width)?;
    Ok(alloc::vec![s.matrix(), gen_scalar_family(1, r, scalar_dim)?])
}

/// Random member of the exact class: singular values drawn from `{r, 1}`.
pub fn gen_exact_c1r<R: Rng + ?Sized>(rng: &mut R, dim: usize, r: f64) -> ComplexMatrix {
    let sigma: Vec<f64> = (0..dim).map(|_| if rng.random_bool(0.5) { 1.0 } else { r }).collect();
    with_singular_values(rng, &sigma)
}

/// Random `C(1,r)` member with singular values in `[r, 1]`; when
/// `boundary > 0`, that many singular values sit exactly on `{r, 1}`.
pub fn gen_c1r_member<R: Rng + ?Sized>(rng: &mut R, dim: usize, r: f64, boundary: usize) -> ComplexMatrix {
    let sigma: Vec<f64> = (0..dim)
        .map(|k| {
            if k < boundary {
                if rng.random_bool(0.5) {
                    1.0
                } else {
                    r
                }
            } else {
                rng.random_range(r + 0.05 * (1.0 - r)..=1.0 - 0.05 * (1.0 - r))
            }
        })
        .collect();
    with_singular_values(rng, &sigma)
}

/// `W (J ⊕ C) W*` with `J` exact of size `exact_dim` and `C` a generic
/// member (one boundary singular value when it has room for it).
pub fn gen_mixed_c1r<R: Rng + ?Sized>(rng: &mut R, dim: usize, r: f64, exact_dim: usize) -> Result<ComplexMatrix> {
    if exact_dim > dim || dim == 0 {
        return Err(Error::InvalidParameter("exact part must fit inside the dimension"));
    }
    let rest = dim - exact_dim;
    let j = gen_exact_c1r(rng, exact_dim, r);
    let c = gen_c1r_member(rng, rest, r, usize::from(rest >= 2));
    let block = direct_sum(&j, &c);
    let w = haar_unitary(rng, dim);
    Ok(&(&w * &block) * &w.adjoint())
}

/// Random `QA(r)` member: singular values in `[r, 1/r]`.
pub fn gen_qar_member<R: Rng + ?Sized>(rng: &mut R, dim: usize, r: f64) -> ComplexMatrix {
    let sigma: Vec<f64> = (0..dim).map(|_| rng.random_range(r * 1.05..=1.0 / (r * 1.05))).collect();
    with_singular_values(rng, &sigma)
}

/// Random invertible matrix with singular values in `[lo, hi]`.
pub fn gen_invertible<R: Rng + ?Sized>(rng: &mut R, dim: usize, lo: f64, hi: f64) -> ComplexMatrix {
    let sigma: Vec<f64> = (0..dim).map(|_| rng.random_range(lo..=hi)).collect();
    with_singular_values(rng, &sigma)
}

/// Block diagonal `A ⊕ B`; either side may be empty.
pub fn direct_sum(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (m, n) = (a.dim(), b.dim());
    ComplexMatrix::from_fn(m + n, |i, j| match (i < m, j < m) {
        (true, true) => a.get(i, j),
        (false, false) => b.get(i - m, j - m),
        _ => Complex64::new(0.0, 0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{defect_c1r, is_doubly_commuting};
    use crate::matrix::operator_norm;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn scalar_family_defect() {
        let tol = Tolerances::default();
        let r: f64 = 0.25;
        let t = gen_scalar_family(1, r, 1).unwrap();
        assert!((t.get(0, 0).re - 0.5).abs() < 1e-15);
        let d = defect_c1r(&t, r, &tol).unwrap().get(0, 0).re;
        // |T|² = r, so the defect is (1 - r)(1 - r).
        assert!((d - 0.5625).abs() < 1e-15);
        let mut prev = f64::INFINITY;
        for n in 1..=10 {
            let t = gen_scalar_family(n, r, 1).unwrap();
            let d = defect_c1r(&t, r, &tol).unwrap().get(0, 0).re;
            let s = r.powf(1.0 / n as f64);
            assert!((d - (1.0 - s) * (1.0 - r * r / s)).abs() < 1e-15);
            assert!(d > 0.0 && d < prev);
            prev = d;
        }
        assert!(gen_scalar_family(0, r, 1).is_err());
    }

    #[test]
    fn sarason_weight_identity() {
        for alpha in [0.0, 0.3, 0.7] {
            for r in [0.3f64, 0.5, 0.9] {
                for n in -8i64..=8 {
                    let a = sarason_weight(alpha, r, n);
                    let lhs = 1.0 + r * r - a * a - r * r / (a * a);
                    let p = r.powf(2.0 * (alpha + n as f64));
                    let q = r.powf(2.0 * (alpha + n as f64 + 1.0));
                    let rhs = p * (1.0 - r * r).powi(2) / ((1.0 + p) * (1.0 + q));
                    assert!((lhs - rhs).abs() <= 1e-12);
                    assert!(a > r && a < 1.0);
                }
            }
        }
    }

    #[test]
    fn sarason_matrix_structure() {
        let tol = Tolerances::default();
        let shift = SarasonShift::new(0.3, 0.5, 3).unwrap();
        let s = shift.matrix();
        assert_eq!(s.dim(), 7);
        assert!((s.get(0, 6).re - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((s.get(1, 0).re - sarason_weight(0.3, 0.5, -3)).abs() < 1e-15);
        let k = classify(&s, 0.5, &tol).unwrap();
        assert!(k.c1r.member && !k.exact_c1r.member);
        assert!(k.c1r.defect_min_eig > 0.0);
        let wrap = 1.0 + 0.25 - 0.5 - 0.5;
        let d = defect_c1r(&s, 0.5, &tol).unwrap();
        assert!((d.get(6, 6).re - wrap).abs() < 1e-14);
        assert!(SarasonShift::new(1.0, 0.5, 3).is_err());
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = rng_from_seed(3);
        for dim in [1, 2, 5, 9] {
            assert!(haar_unitary(&mut rng, dim).unitarity_residual() < 1e-13);
        }
    }

    #[test]
    fn normal_tuple_properties() {
        let tol = Tolerances::default();
        let t = gen_normal_tuple(7, 3, 4, 0.5, &tol).unwrap();
        let dc = is_doubly_commuting(&t, &tol);
        assert!(dc.holds && dc.max_residual <= 1e-12);
        for op in t.ops() {
            assert!(classify(op, 0.5, &tol).unwrap().c1r.member);
        }
        assert_eq!(t, gen_normal_tuple(7, 3, 4, 0.5, &tol).unwrap());
        assert_ne!(t, gen_normal_tuple(8, 3, 4, 0.5, &tol).unwrap());
    }

    #[test]
    fn tensor_tuple_properties() {
        let tol = Tolerances::default();
        let factors = default_tensor_factors(0.5, 2, 2).unwrap();
        let t = gen_tensor_tuple(&factors, 0.5, &tol).unwrap();
        assert_eq!(t.dim(), 10);
        let dc = is_doubly_commuting(&t, &tol);
        assert!(dc.holds && dc.max_residual <= 1e-13);
        let a = &t.ops()[0];
        assert!(operator_norm(&a.commutator(&a.adjoint())) > 1e-3);
        let b = &t.ops()[1];
        assert!(operator_norm(&b.commutator(&b.adjoint())) < 1e-15);
        let bad = vec![ComplexMatrix::identity(2).scale_real(1.5)];
        assert!(matches!(gen_tensor_tuple(&bad, 0.5, &tol), Err(Error::NotMember { .. })));
    }

    #[test]
    fn mixed_member_contains_exact_part() {
        let tol = Tolerances::default();
        let mut rng = rng_from_seed(11);
        let t = gen_mixed_c1r(&mut rng, 5, 0.4, 2).unwrap();
        assert!(classify(&t, 0.4, &tol).unwrap().c1r.member);
        let e = gen_exact_c1r(&mut rng, 4, 0.4);
        assert!(classify(&e, 0.4, &tol).unwrap().exact_c1r.member);
        let q = gen_qar_member(&mut rng, 4, 0.4);
        assert!(classify(&q, 0.4, &tol).unwrap().qar.member);
    }

    proptest! {
        #[test]
        fn c1r_members_certify(seed in any::<u64>(), dim in 1usize..6, r in 0.1f64..0.9) {
            let tol = Tolerances::default();
            let mut rng = rng_from_seed(seed);
            let t = gen_c1r_member(&mut rng, dim, r, 0);
            let k = classify(&t, r, &tol).unwrap();
            prop_assert!(k.c1r.member && k.c1r.routes_agree);
            prop_assert!(k.c1r.defect_min_eig >= -1e-10);
        }
    }
}
