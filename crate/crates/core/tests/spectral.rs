mod common;

use annulus_core::instances::{default_tensor_factors, gen_normal_tuple, gen_tensor_tuple};
use annulus_core::spectral::{joint_spectral_resolution, snap_spectrum, ud_factorize};
use annulus_core::{Complex64, Tolerances};
use common::*;
use proptest::prelude::*;

#[test]
fn tensor_factorization_and_atoms() {
    let tol = Tolerances::default();
    let tuple = gen_tensor_tuple(&default_tensor_factors(0.5, 3, 2).unwrap(), 0.5, &tol).unwrap();
    let fact = ud_factorize(&tuple, &tol).unwrap();
    let n = tuple.dim();
    for (j, t) in tuple.ops().iter().enumerate() {
        let (u, d) = (dm(&fact.unitaries()[j]), dm(&fact.positives()[j]));
        assert!(op_norm(&(&u * &d - dm(t))) <= 1e-12);
        let gram = dm(t).adjoint() * dm(t);
        assert!(op_norm(&(&d * &d - gram)) <= 1e-12);
    }
    let res = joint_spectral_resolution(&fact, &tol).unwrap();
    let mut sum = Dm::zeros(n, n);
    for atom in res.atoms() {
        let b = atom.basis.as_dmatrix();
        sum += b * b.adjoint();
        for (j, &v) in atom.values.iter().enumerate() {
            let d = dm(&fact.positives()[j]);
            assert!(op_norm(&(&d * b - b * Complex64::new(v, 0.0))) <= 1e-10);
        }
    }
    assert!(op_norm(&(sum - eye(n))) <= 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn snapping_respects_both_bounds(seed in 0u64..100_000, d in 1usize..4, dim in 1usize..7, r in 0.2f64..0.8, m in 1u32..30) {
        let tol = Tolerances::default();
        let tuple = gen_normal_tuple(seed, d, dim, r, &tol).unwrap();
        let fact = ud_factorize(&tuple, &tol).unwrap();
        let approx = snap_spectrum(&fact, m, &tol).unwrap();
        let bound = 0.5f64.powi(m as i32);
        for (j, t) in tuple.ops().iter().enumerate() {
            let tm = dm(&approx.snapped_tuple[j]);
            prop_assert!(op_norm(&(&tm - dm(t))) <= bound);
            prop_assert!(op_norm(&(lu_inverse(&tm) - lu_inverse(&dm(t)))) <= bound / (r * r));
        }
    }
}
