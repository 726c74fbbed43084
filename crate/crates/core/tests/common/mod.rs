//! Independent oracles shared by the integration tests. Everything here goes
//! through nalgebra's Hermitian eigensolver and LU inverse directly, never
//! through the crate's SVD-based routines.

#![allow(dead_code)]

use annulus_core::classes::OperatorTuple;
use annulus_core::instances::{default_tensor_factors, gen_normal_tuple, gen_tensor_tuple, SarasonShift};
use annulus_core::{Complex64, ComplexMatrix, Tolerances};
use nalgebra::DMatrix;

pub type Dm = DMatrix<Complex64>;

pub const SEED_R: f64 = 0.5;

pub fn dm(a: &ComplexMatrix) -> Dm {
    a.as_dmatrix().clone()
}

pub fn eye(n: usize) -> Dm {
    Dm::identity(n, n)
}

/// Ascending eigenvalues and eigenvectors of the Hermitian part of `a`.
pub fn herm_eig(a: &Dm) -> (Vec<f64>, Dm) {
    let h = (a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let e = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..e.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| e.eigenvalues[i].total_cmp(&e.eigenvalues[j]));
    let vals = order.iter().map(|&k| e.eigenvalues[k]).collect();
    let mut vecs = Dm::zeros(a.nrows(), a.ncols());
    for (c, &k) in order.iter().enumerate() {
        vecs.set_column(c, &e.eigenvectors.column(k));
    }
    (vals, vecs)
}

/// `‖a‖₂ = sqrt(λ_max(a*a))`.
pub fn op_norm(a: &Dm) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let g = if a.nrows() >= a.ncols() { a.adjoint() * a } else { a * a.adjoint() };
    herm_eig(&g).0.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

pub fn singular_values(a: &Dm) -> Vec<f64> {
    herm_eig(&(a.adjoint() * a)).0.into_iter().map(|l| l.max(0.0).sqrt()).collect()
}

pub fn lu_inverse(a: &Dm) -> Dm {
    a.clone().try_inverse().expect("oracle inverse of a singular matrix")
}

/// `(1+r²)I - T*T - r² T⁻¹T⁻*`.
pub fn defect(t: &Dm, r: f64) -> Dm {
    let n = t.nrows();
    let inv = lu_inverse(t);
    eye(n) * Complex64::new(1.0 + r * r, 0.0)
        - t.adjoint() * t
        - inv.clone() * inv.adjoint() * Complex64::new(r * r, 0.0)
}

/// `T^n` for a signed power, through repeated products and the LU inverse.
pub fn power(t: &Dm, n: i32) -> Dm {
    let base = if n < 0 { lu_inverse(t) } else { t.clone() };
    let mut acc = eye(t.nrows());
    for _ in 0..n.unsigned_abs() {
        acc = &acc * &base;
    }
    acc
}

/// `[-p, p]^d` in lexicographic order.
pub fn powers(d: usize, p: i32) -> Vec<Vec<i32>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (-p..=p).map(move |k| {
                    let mut x = prefix.clone();
                    x.push(k);
                    x
                })
            })
            .collect();
    }
    out
}

pub fn monomial(ops: &[Dm], n: &[i32]) -> Dm {
    let mut acc = eye(ops[0].nrows());
    for (t, &k) in ops.iter().zip(n) {
        acc = &acc * power(t, k);
    }
    acc
}

/// Projector onto the eigenvectors of `s` with eigenvalue at most
/// `rel · max(1, λ_max)`.
pub fn kernel_projector(s: &Dm, rel: f64) -> (Dm, usize) {
    let (vals, vecs) = herm_eig(s);
    let cut = rel * vals.last().copied().unwrap_or(0.0).abs().max(1.0);
    let keep: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] <= cut).collect();
    let mut b = Dm::zeros(s.nrows(), keep.len());
    for (c, &k) in keep.iter().enumerate() {
        b.set_column(c, &vecs.column(k));
    }
    (&b * b.adjoint(), keep.len())
}

/// Exact part of `t` by brute force: the common kernel of `p*Δp` over every
/// product `p` of at most `max_letters` factors `T`, `T*`, read off as the
/// kernel of their (positive semidefinite) sum.
pub fn brute_force_exact_part(t: &Dm, r: f64, max_letters: usize) -> (Dm, usize) {
    let d = defect(t, r);
    let ts = t.adjoint();
    let mut layer = vec![eye(t.nrows())];
    let mut sum = d.clone();
    for _ in 0..max_letters {
        let mut next = Vec::with_capacity(layer.len() * 2);
        for p in &layer {
            for letter in [t, &ts] {
                let q = p * letter;
                sum += q.adjoint() * &d * &q;
                next.push(q);
            }
        }
        layer = next;
    }
    kernel_projector(&sum, 1e-9)
}

pub fn kron(a: &Dm, b: &Dm) -> Dm {
    a.kronecker(b)
}

/// Pairwise commutators `[A_i, A_j]`, `[A_i, A_j*]`, largest norm.
pub fn double_commutation(ops: &[Dm]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in ops.iter().enumerate() {
        for (j, b) in ops.iter().enumerate() {
            if i != j {
                worst = worst.max(op_norm(&(a * b - b * a)));
                let bs = b.adjoint();
                worst = worst.max(op_norm(&(a * &bs - &bs * a)));
            }
        }
    }
    worst
}

/// Scalar family `0.8 I₁`, Sarason shift (α = 0.3, half-width 8), the tensor
/// tuple (Sarason of half-width 2, scalar of size 2) and the random normal
/// tuple (d = 3, dim 4, seed 7), all at `r = 0.5`.
pub fn seed_set(tol: &Tolerances) -> Vec<(&'static str, OperatorTuple)> {
    let r = SEED_R;
    let scalar = OperatorTuple::new(r, vec![ComplexMatrix::identity(1).scale_real(0.8)], tol).unwrap();
    let sarason = OperatorTuple::new(r, vec![SarasonShift::new(0.3, r, 8).unwrap().matrix()], tol).unwrap();
    let tensor = gen_tensor_tuple(&default_tensor_factors(r, 2, 2).unwrap(), r, tol).unwrap();
    let normal = gen_normal_tuple(7, 3, 4, r, tol).unwrap();
    vec![("scalar", scalar), ("sarason", sarason), ("tensor", tensor), ("normal", normal)]
}

/// Haar-like unitary from nalgebra's QR of a complex Gaussian matrix.
pub fn random_unitary<R: rand::Rng>(rng: &mut R, n: usize) -> Dm {
    use rand_distr::{Distribution, StandardNormal};
    let g =
        Dm::from_fn(n, n, |_, _| Complex64::new(StandardNormal.sample(&mut *rng), StandardNormal.sample(&mut *rng)));
    g.qr().q()
}

pub fn from_dm(a: Dm) -> ComplexMatrix {
    ComplexMatrix::from_dmatrix(a).unwrap()
}
