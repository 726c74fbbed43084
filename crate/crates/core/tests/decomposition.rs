mod common;

use annulus_core::classes::OperatorTuple;
use annulus_core::decomposition::{
    canonical_decompose, canonical_decompose_qar, tuple_decompose, tuple_decompose_qar, word_defect, BlockType, Letter,
    Word,
};
use annulus_core::instances::{
    default_tensor_factors, gen_mixed_c1r, gen_scalar_family, gen_tensor_tuple, rng_from_seed,
};
use annulus_core::{Complex64, Tolerances};
use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fixed_point_matches_word_oracle(seed in 0u64..100_000, dim in 1usize..6, r in 0.2f64..0.8, frac in 0.0f64..=1.0) {
        let tol = Tolerances::default();
        let mut rng = rng_from_seed(seed);
        let exact = ((dim as f64) * frac).round() as usize;
        let t = gen_mixed_c1r(&mut rng, dim, r, exact).unwrap();
        let res = canonical_decompose(&t, r, &tol).unwrap();
        let (oracle, k) = brute_force_exact_part(&dm(&t), r, 10);
        let h1 = res.block(&[BlockType::T1]).unwrap();
        prop_assert_eq!(h1.dim(), k);
        prop_assert!(op_norm(&(dm(&h1.projector()) - oracle)) <= 1e-8);
        prop_assert!(res.all_certified());
        prop_assert!(res.projector_residual() <= 1e-10);
    }

    #[test]
    fn word_defect_matches_direct_product(seed in 0u64..100_000, letters in proptest::collection::vec(any::<bool>(), 0..8)) {
        let tol = Tolerances::default();
        let r = 0.5;
        let mut rng = rng_from_seed(seed);
        let t = gen_mixed_c1r(&mut rng, 4, r, 1).unwrap();
        let a = dm(&t);
        let mut p = eye(4);
        let mut seq = Vec::new();
        for &star in &letters {
            p = if star { p * a.adjoint() } else { &p * &a };
            seq.push(if star { Letter::TStar } else { Letter::T });
        }
        let w = Word::from_letters(&seq).unwrap();
        prop_assert_eq!(w.total_length() as usize, letters.len());
        let expected = p.adjoint() * defect(&a, r) * &p;
        prop_assert!(op_norm(&(dm(&word_defect(&t, r, &w, &tol).unwrap()) - expected)) <= 1e-12);
    }
}

#[test]
fn scalar_family_defect_decreases_and_stays_cnu() {
    let tol = Tolerances::default();
    let r: f64 = 0.25;
    let mut prev = f64::INFINITY;
    for n in 1..=10u32 {
        let t = gen_scalar_family(n, r, 2).unwrap();
        let x = r.powf(1.0 / (2.0 * n as f64));
        assert!((t.get(0, 0).re - x).abs() <= 1e-15);
        let d = defect(&dm(&t), r)[(0, 0)].re;
        assert!((d - (1.0 - r.powf(1.0 / n as f64)) * (1.0 - r * r * r.powf(-1.0 / n as f64))).abs() <= 1e-14);
        assert!(d > 0.0 && d < prev);
        prev = d;
        let res = canonical_decompose(&t, r, &tol).unwrap();
        assert_eq!(res.block(&[BlockType::T1]).unwrap().dim(), 0);
    }
}

#[test]
fn tensor_instance_blocks_are_products() {
    let tol = Tolerances::default();
    let r = 0.5;
    let factors = default_tensor_factors(r, 2, 2).unwrap();
    let tuple = gen_tensor_tuple(&factors, r, &tol).unwrap();
    let res = tuple_decompose(&tuple, &tol).unwrap();
    let dims: Vec<usize> = res.blocks.iter().map(|b| b.dim()).collect();
    assert_eq!(dims, [0, 0, 0, 10]);
}

#[test]
fn exact_factor_tensor_gives_two_blocks() {
    let tol = Tolerances::default();
    let r = 0.5;
    let exact = annulus_core::ComplexMatrix::from_real_diagonal(&[1.0, r]);
    let cnu = gen_scalar_family(1, r, 3).unwrap();
    let tuple = gen_tensor_tuple(&[exact, cnu], r, &tol).unwrap();
    let res = tuple_decompose(&tuple, &tol).unwrap();
    let dims: Vec<usize> = res.blocks.iter().map(|b| b.dim()).collect();
    assert_eq!(dims, [0, 6, 0, 0]);
}

#[test]
fn qar_variant_matches_scaled_decomposition() {
    let tol = Tolerances::default();
    let r = 0.6;
    let mut rng = rng_from_seed(12);
    let c = gen_mixed_c1r(&mut rng, 4, r * r, 2).unwrap();
    let t = from_dm(dm(&c) * Complex64::new(1.0 / r, 0.0));
    let direct = canonical_decompose(&c, r * r, &tol).unwrap();
    let via = canonical_decompose_qar(&t, r, &tol).unwrap();
    let (p, q) = (direct.block(&[BlockType::T1]).unwrap(), via.block(&[BlockType::T1]).unwrap());
    assert_eq!(p.dim(), 2);
    assert!(op_norm(&(dm(&p.projector()) - dm(&q.projector()))) <= 1e-10);
    let tuple = OperatorTuple::new(r, vec![t], &tol).unwrap();
    assert_eq!(tuple_decompose_qar(&tuple, &tol).unwrap().blocks[0].dim(), 2);
}

#[test]
fn non_doubly_commuting_tuple_is_rejected() {
    let tol = Tolerances::default();
    let r = 0.5;
    let mut rng = rng_from_seed(4);
    let a = gen_mixed_c1r(&mut rng, 3, r, 1).unwrap();
    let b = gen_mixed_c1r(&mut rng, 3, r, 1).unwrap();
    let tuple = OperatorTuple::new(r, vec![a, b], &tol).unwrap();
    assert!(matches!(tuple_decompose(&tuple, &tol), Err(annulus_core::Error::NotDoublyCommuting { .. })));
}
