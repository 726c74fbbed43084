//! Splitting a `C(1,r)` operator into its exact part and its completely
//! non-unitary remainder, and the `2^d`-block splitting of doubly commuting
//! tuples.
//!
//! The exact part `H₁` is the largest subspace of `ker Δ` (with `Δ` the
//! class defect) that is invariant under both `T` and `T*`. It is computed
//! by the decreasing iteration `M₀ = ker Δ`,
//! `M_{i+1} = {x ∈ M_i : Tx ∈ M_i, T*x ∈ M_i}`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::classes::{classify, defect_c1r, doubly_commuting_ops, qa_to_c1r, validate_radius, OperatorTuple};
use crate::error::{Error, Result};
use crate::matrix::{hermitian_eig, kernel_with_cutoff, operator_norm, Basis, ComplexMatrix, Tolerances};
use crate::Complex64;

/// Longest word (number of `T^n T*^m` factor pairs) accepted.
pub const MAX_WORD_PAIRS: usize = 6;
/// Residual allowed for block reduction and exact-class restriction checks.
pub const CERTIFICATE_TOL: f64 = 1e-9;
/// Factor by which `kernel_tol` is scaled up and down to test stability.
pub const AMBIGUITY_SPREAD: f64 = 10.0;

/// `p(T) = T^{n_1} T*^{m_1} ⋯ T^{n_k} T*^{m_k}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    n: Vec<u32>,
    m: Vec<u32>,
}

/// A single letter of a word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Letter {
    T,
    TStar,
}

impl Word {
    pub fn new(n: Vec<u32>, m: Vec<u32>) -> Result<Self> {
        if n.len() != m.len() {
            return Err(Error::DimensionMismatch { expected: n.len(), found: m.len() });
        }
        if n.is_empty() {
            return Err(Error::InvalidParameter("a word needs at least one factor pair"));
        }
        if n.len() > MAX_WORD_PAIRS {
            return Err(Error::WordTooLong(n.len()));
        }
        Ok(Self { n, m })
    }

    /// `k = 1`, `n = m = (0)`: `p(T) = I`.
    pub fn identity() -> Self {
        Self { n: vec![0], m: vec![0] }
    }

    /// Groups a letter sequence into `T^n T*^m` pairs.
    pub fn from_letters(letters: &[Letter]) -> Result<Self> {
        let mut n = Vec::new();
        let mut m = Vec::new();
        for &l in letters {
            match l {
                Letter::T => {
                    if m.last().is_some_and(|&x: &u32| x > 0) || n.is_empty() {
                        n.push(0);
                        m.push(0);
                    }
                    *n.last_mut().expect("pushed above") += 1;
                }
                Letter::TStar => {
                    if n.is_empty() {
                        n.push(0);
                        m.push(0);
                    }
                    *m.last_mut().expect("pushed above") += 1;
                }
            }
        }
        if n.is_empty() {
            return Ok(Self::identity());
        }
        Self::new(n, m)
    }

    /// Every word with at most `len` letters, shortest first.
    pub fn all_up_to(len: usize) -> Result<Vec<Word>> {
        let mut out = vec![Self::identity()];
        let mut layer: Vec<Vec<Letter>> = vec![Vec::new()];
        for _ in 0..len {
            let mut next = Vec::with_capacity(layer.len() * 2);
            for w in &layer {
                for l in [Letter::T, Letter::TStar] {
                    let mut x = w.clone();
                    x.push(l);
                    out.push(Self::from_letters(&x)?);
                    next.push(x);
                }
            }
            layer = next;
        }
        Ok(out)
    }

    pub fn pairs(&self) -> usize {
        self.n.len()
    }

    pub fn n(&self) -> &[u32] {
        &self.n
    }

    pub fn m(&self) -> &[u32] {
        &self.m
    }

    pub fn total_length(&self) -> u32 {
        self.n.iter().chain(&self.m).sum()
    }

    pub fn apply(&self, t: &ComplexMatrix) -> ComplexMatrix {
        let ts = t.adjoint();
        let mut acc = ComplexMatrix::identity(t.dim());
        for (&a, &b) in self.n.iter().zip(&self.m) {
            acc = &(&acc * &t.pow_unsigned(a)) * &ts.pow_unsigned(b);
        }
        acc
    }
}

/// `Δ_w(T) = p(T)* Δ(T) p(T)`, the defect along the word `w`.
pub fn word_defect(t: &ComplexMatrix, r: f64, word: &Word, tol: &Tolerances) -> Result<ComplexMatrix> {
    if word.pairs() > MAX_WORD_PAIRS {
        return Err(Error::WordTooLong(word.pairs()));
    }
    let d = defect_c1r(t, r, tol)?;
    let p = word.apply(t);
    Ok((&(&p.adjoint() * &d) * &p).hermitian_part())
}

/// Type of a block in one coordinate: exact class (`t1`) or completely
/// non-unitary (`t2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlockType {
    T1,
    T2,
}

impl BlockType {
    pub fn name(self) -> &'static str {
        match self {
            BlockType::T1 => "t1",
            BlockType::T2 => "t2",
        }
    }

    /// `exact` or `cnu`.
    pub fn description(self) -> &'static str {
        match self {
            BlockType::T1 => "exact",
            BlockType::T2 => "cnu",
        }
    }
}

/// Certificate of one tuple entry restricted to one block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntryCertificate {
    pub kind: BlockType,
    /// For `t1`: spectral distance of `|T|²` to `{r², 1}`. For `t2`: the
    /// dimension of the exact part of the restriction (zero when certified).
    pub residual: f64,
    /// Smallest eigenvalue of the restricted defect.
    pub defect_min_eig: f64,
    pub passed: bool,
}

/// A reducing block with its label and certificates.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub label: Vec<BlockType>,
    pub basis: Basis,
    /// Largest of `‖(I-Π)T_jΠ‖`, `‖(I-Π)T_j*Π‖` over entries.
    pub reduction_residual: f64,
    pub certificates: Vec<EntryCertificate>,
}

impl Block {
    pub fn dim(&self) -> usize {
        self.basis.rank()
    }

    pub fn projector(&self) -> ComplexMatrix {
        self.basis.projector()
    }

    /// Labels joined with commas, e.g. `t1,t2`.
    pub fn label_string(&self) -> alloc::string::String {
        let names: Vec<&str> = self.label.iter().map(|b| b.name()).collect();
        names.join(",")
    }
}

/// Orthogonal decomposition into labeled reducing blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult {
    pub blocks: Vec<Block>,
    /// Whether some kernel dimension changed when `kernel_tol` was scaled by
    /// 10 or 1/10.
    pub ambiguous: bool,
}

impl DecompositionResult {
    pub fn block(&self, label: &[BlockType]) -> Option<&Block> {
        self.blocks.iter().find(|b| b.label == label)
    }

    /// Largest of `‖Π_aΠ_b‖` over distinct blocks and `‖ΣΠ - I‖`.
    pub fn projector_residual(&self) -> f64 {
        let n = self.blocks[0].basis.ambient_dim();
        let projectors: Vec<ComplexMatrix> = self.blocks.iter().map(Block::projector).collect();
        let mut worst = 0.0f64;
        let mut sum = ComplexMatrix::zeros(n);
        for (a, p) in projectors.iter().enumerate() {
            for q in &projectors[a + 1..] {
                worst = worst.max(operator_norm(&(p * q)));
            }
            sum = &sum + p;
        }
        worst.max(operator_norm(&(&sum - &ComplexMatrix::identity(n))))
    }

    pub fn all_certified(&self) -> bool {
        self.blocks.iter().all(|b| b.reduction_residual <= CERTIFICATE_TOL && b.certificates.iter().all(|c| c.passed))
    }
}

/// Absolute singular value cutoff for the invariance iteration.
fn invariance_cutoff(t: &ComplexMatrix, kernel_tol: f64) -> f64 {
    kernel_tol * operator_norm(t).max(1.0)
}

/// Basis of `ker Δ`: eigenvectors of the defect with eigenvalue at most
/// `kernel_tol · max(‖Δ‖, 1)`.
fn defect_kernel(t: &ComplexMatrix, r: f64, kernel_tol: f64, tol: &Tolerances) -> Result<(Basis, f64)> {
    let d = defect_c1r(t, r, tol)?;
    let eig = hermitian_eig(&d, tol)?;
    let scale = eig.eigenvalues.iter().fold(1.0f64, |m, l| m.max(l.abs()));
    let cut = kernel_tol * scale;
    let q = eig.eigenvectors.as_dmatrix();
    let keep: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&k| eig.eigenvalues[k] <= cut).collect();
    let mut cols = DMatrix::zeros(t.dim(), keep.len());
    for (c, &k) in keep.iter().enumerate() {
        cols.set_column(c, &q.column(k));
    }
    Ok((Basis::span_of(&cols, 0.5)?, eig.eigenvalues[0]))
}

/// Largest subspace of `ker Δ` invariant under `T` and `T*`.
fn exact_part(t: &ComplexMatrix, r: f64, kernel_tol: f64, tol: &Tolerances) -> Result<Basis> {
    let (mut basis, _) = defect_kernel(t, r, kernel_tol, tol)?;
    let cutoff = invariance_cutoff(t, kernel_tol);
    let ts = t.adjoint();
    let n = t.dim();
    for _ in 0..=n {
        if basis.is_empty() {
            return Ok(basis);
        }
        let b = basis.as_dmatrix();
        let leak = DMatrix::<Complex64>::identity(n, n) - b * b.adjoint();
        let k = basis.rank();
        let mut stacked = DMatrix::zeros(2 * n, k);
        stacked.rows_mut(0, n).copy_from(&(&leak * t.as_dmatrix() * b));
        stacked.rows_mut(n, n).copy_from(&(&leak * ts.as_dmatrix() * b));
        let (inner, _) = kernel_with_cutoff(&stacked, cutoff)?;
        if inner.rank() == k {
            return Ok(basis);
        }
        basis = basis.compose(&inner)?;
    }
    Err(Error::NoConvergence)
}

/// Exact part computed at `kernel_tol` and at `kernel_tol` scaled by
/// `AMBIGUITY_SPREAD^{±1}`; reports whether the dimension moved.
fn exact_part_with_ambiguity(t: &ComplexMatrix, r: f64, tol: &Tolerances) -> Result<(Basis, bool)> {
    let base = exact_part(t, r, tol.kernel_tol(), tol)?;
    let lo = exact_part(t, r, tol.kernel_tol() / AMBIGUITY_SPREAD, tol)?;
    let hi = exact_part(t, r, (tol.kernel_tol() * AMBIGUITY_SPREAD).min(0.5), tol)?;
    let ambiguous = lo.rank() != base.rank() || hi.rank() != base.rank();
    Ok((base, ambiguous))
}

fn require_c1r(index: usize, t: &ComplexMatrix, r: f64, tol: &Tolerances) -> Result<()> {
    let cert = classify(t, r, tol)?.c1r;
    if cert.member {
        Ok(())
    } else {
        let witness = cert.witness_norms.0.max(cert.witness_norms.1);
        Err(Error::NotMember { index, class: "C1r", witness })
    }
}

/// `max(‖(I-Π)TΠ‖, ‖(I-Π)T*Π‖)` for the span of `basis`.
pub fn reduction_residual(t: &ComplexMatrix, basis: &Basis) -> f64 {
    if basis.is_empty() || basis.rank() == basis.ambient_dim() {
        return 0.0;
    }
    let n = t.dim();
    let b = basis.as_dmatrix();
    let leak = DMatrix::<Complex64>::identity(n, n) - b * b.adjoint();
    let a = ComplexMatrix::from_dmatrix_unchecked(&leak * t.as_dmatrix() * b * b.adjoint());
    let a_star = ComplexMatrix::from_dmatrix_unchecked(&leak * t.as_dmatrix().adjoint() * b * b.adjoint());
    operator_norm(&a).max(operator_norm(&a_star))
}

/// Certificate for `T` restricted to `basis` being of the given type.
fn certify(t: &ComplexMatrix, r: f64, basis: &Basis, kind: BlockType, tol: &Tolerances) -> Result<EntryCertificate> {
    let Some(a) = basis.compress(t) else {
        return Ok(EntryCertificate { kind, residual: 0.0, defect_min_eig: 0.0, passed: true });
    };
    let cls = classify(&a, r, tol)?;
    let defect_min_eig = cls.c1r.defect_min_eig;
    Ok(match kind {
        BlockType::T1 => {
            let residual = cls.exact_c1r.spectral_residual.max(cls.exact_c1r.defect_residual_norm);
            EntryCertificate { kind, residual, defect_min_eig, passed: residual <= CERTIFICATE_TOL }
        }
        BlockType::T2 => {
            let inner = exact_part(&a, r, tol.kernel_tol(), tol)?;
            EntryCertificate { kind, residual: inner.rank() as f64, defect_min_eig, passed: inner.is_empty() }
        }
    })
}

/// `H = H₁ ⊕ H₂` with `T|H₁` in the exact class and `T|H₂` completely
/// non-unitary. Blocks are labeled `[t1]` and `[t2]`.
pub fn canonical_decompose(t: &ComplexMatrix, r: f64, tol: &Tolerances) -> Result<DecompositionResult> {
    validate_radius(r, tol)?;
    require_c1r(0, t, r, tol)?;
    let (h1, ambiguous) = exact_part_with_ambiguity(t, r, tol)?;
    let h2 = h1.complement()?;
    let mut blocks = Vec::with_capacity(2);
    for (basis, kind) in [(h1, BlockType::T1), (h2, BlockType::T2)] {
        let certificate = certify(t, r, &basis, kind, tol)?;
        let reduction = reduction_residual(t, &basis);
        blocks.push(Block { label: vec![kind], basis, reduction_residual: reduction, certificates: vec![certificate] });
    }
    check_blocks(&blocks)?;
    Ok(DecompositionResult { blocks, ambiguous })
}

/// Canonical decomposition relative to `QA(r)` through `rT ∈ C(1,r²)`.
pub fn canonical_decompose_qar(t: &ComplexMatrix, r: f64, tol: &Tolerances) -> Result<DecompositionResult> {
    let (s, r2) = qa_to_c1r(t, r, tol)?;
    canonical_decompose(&s, r2, tol)
}

fn check_blocks(blocks: &[Block]) -> Result<()> {
    for (i, b) in blocks.iter().enumerate() {
        if b.reduction_residual > CERTIFICATE_TOL {
            return Err(Error::RestrictionFailed { block: i, class: "reducing", residual: b.reduction_residual });
        }
        for c in &b.certificates {
            if !c.passed {
                let class = match c.kind {
                    BlockType::T1 => "exact_C1r",
                    BlockType::T2 => "cnu",
                };
                return Err(Error::RestrictionFailed { block: i, class, residual: c.residual });
            }
        }
    }
    Ok(())
}

/// Outcome of checking that the exact part of `A` reduces `B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossReduction {
    pub holds: bool,
    /// `max(‖(I-Π₁)BΠ₁‖, ‖(I-Π₁)B*Π₁‖)`.
    pub reduction_residual: f64,
    /// Largest `‖[Δ_w(A), B]‖`, `‖[Δ_w(A), B*]‖` over words of up to three
    /// letters.
    pub commutator_residual: f64,
}

/// Checks that `H₁(A)` reduces `B` and that the word defects of `A` commute
/// with `B` and `B*`.
pub fn cross_reduction_check(a: &ComplexMatrix, b: &ComplexMatrix, r: f64, tol: &Tolerances) -> Result<CrossReduction> {
    validate_radius(r, tol)?;
    let dc = doubly_commuting_ops(&[a.clone(), b.clone()], tol);
    if !dc.holds {
        return Err(Error::NotDoublyCommuting { residual: dc.max_residual });
    }
    require_c1r(0, a, r, tol)?;
    require_c1r(1, b, r, tol)?;
    let (h1, _) = exact_part_with_ambiguity(a, r, tol)?;
    let reduction_residual = reduction_residual(b, &h1);
    let bs = b.adjoint();
    let mut commutator_residual = 0.0f64;
    for w in Word::all_up_to(3)? {
        let d = word_defect(a, r, &w, tol)?;
        commutator_residual =
            commutator_residual.max(operator_norm(&d.commutator(b))).max(operator_norm(&d.commutator(&bs)));
    }
    let holds = reduction_residual <= CERTIFICATE_TOL && commutator_residual <= CERTIFICATE_TOL;
    Ok(CrossReduction { holds, reduction_residual, commutator_residual })
}

/// `2^d` blocks labeled by `ω ∈ {t1, t2}^d` in lexicographic order
/// (`t1` first). Entry `j` restricted to a block labeled `ω` is exact when
/// `ω_j = t1` and completely non-unitary when `ω_j = t2`. Empty blocks are
/// kept.
pub fn tuple_decompose(tuple: &OperatorTuple, tol: &Tolerances) -> Result<DecompositionResult> {
    decompose_ops(tuple.ops(), tuple.r(), tol)
}

/// [`tuple_decompose`] relative to `QA(r)`, through `rT_j ∈ C(1,r²)`.
pub fn tuple_decompose_qar(tuple: &OperatorTuple, tol: &Tolerances) -> Result<DecompositionResult> {
    let r = tuple.r();
    let scaled = tuple.ops().iter().map(|t| qa_to_c1r(t, r, tol).map(|(s, _)| s)).collect::<Result<Vec<_>>>()?;
    decompose_ops(&scaled, r * r, tol)
}

fn decompose_ops(ops: &[ComplexMatrix], r: f64, tol: &Tolerances) -> Result<DecompositionResult> {
    validate_radius(r, tol)?;
    let n = ops.first().ok_or(Error::EmptyTuple)?.dim();
    let dc = doubly_commuting_ops(ops, tol);
    if !dc.holds {
        return Err(Error::NotDoublyCommuting { residual: dc.max_residual });
    }
    for (j, t) in ops.iter().enumerate() {
        require_c1r(j, t, r, tol)?;
    }
    let mut frontier: Vec<(Vec<BlockType>, Basis)> = vec![(Vec::new(), Basis::full(n))];
    let mut ambiguous = false;
    for t in ops {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for (label, basis) in frontier {
            let (exact, rest) = match basis.compress(t) {
                None => (Basis::empty(n), Basis::empty(n)),
                Some(a) => {
                    let (inner, amb) = exact_part_with_ambiguity(&a, r, tol)?;
                    ambiguous |= amb;
                    let other = inner.complement()?;
                    (basis.compose(&inner)?, basis.compose(&other)?)
                }
            };
            for (kind, b) in [(BlockType::T1, exact), (BlockType::T2, rest)] {
                let mut l = label.clone();
                l.push(kind);
                next.push((l, b));
            }
        }
        frontier = next;
    }
    let blocks = frontier
        .into_iter()
        .map(|(label, basis)| {
            let reduction = ops.iter().map(|t| reduction_residual(t, &basis)).fold(0.0, f64::max);
            let certificates = ops
                .iter()
                .zip(&label)
                .map(|(t, &kind)| certify(t, r, &basis, kind, tol))
                .collect::<Result<Vec<_>>>()?;
            Ok(Block { label, basis, reduction_residual: reduction, certificates })
        })
        .collect::<Result<Vec<_>>>()?;
    check_blocks(&blocks)?;
    Ok(DecompositionResult { blocks, ambiguous })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_exact_c1r, gen_scalar_family, rng_from_seed, SarasonShift};
    use crate::matrix::distance;

    fn diag(v: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(v)
    }

    #[test]
    fn identity_word_is_plain_defect() {
        let tol = Tolerances::default();
        let t = diag(&[0.6, 0.9]);
        let w = word_defect(&t, 0.5, &Word::identity(), &tol).unwrap();
        assert!(distance(&w, &defect_c1r(&t, 0.5, &tol).unwrap()) == 0.0);
    }

    #[test]
    fn single_power_word_scales_scalar_defects() {
        let tol = Tolerances::default();
        let r: f64 = 0.5;
        let scalar = |x: f64| 1.0 + r * r - x * x - r * r / (x * x);
        let w = Word::new(vec![1], vec![0]).unwrap();
        let d = word_defect(&diag(&[0.5, 0.8]), r, &w, &tol).unwrap();
        let expected = diag(&[0.25 * scalar(0.5), 0.64 * scalar(0.8)]);
        assert!(distance(&d, &expected) < 1e-15);
    }

    #[test]
    fn exact_operator_has_vanishing_word_defects() {
        let tol = Tolerances::default();
        let mut rng = rng_from_seed(2);
        let t = gen_exact_c1r(&mut rng, 4, 0.5);
        for w in Word::all_up_to(4).unwrap() {
            assert!(word_defect(&t, 0.5, &w, &tol).unwrap().max_abs() < 1e-13);
        }
    }

    #[test]
    fn word_guard() {
        assert!(matches!(Word::new(vec![1; 7], vec![1; 7]), Err(Error::WordTooLong(7))));
        let w = Word::from_letters(&[Letter::T, Letter::TStar, Letter::TStar, Letter::T]).unwrap();
        assert_eq!((w.n(), w.m()), (&[1, 1][..], &[2, 0][..]));
        let w = Word::from_letters(&[Letter::TStar, Letter::T]).unwrap();
        assert_eq!((w.n(), w.m()), (&[0, 1][..], &[1, 0][..]));
        assert_eq!(Word::all_up_to(3).unwrap().len(), 15);
    }

    #[test]
    fn diagonal_canonical_example() {
        let tol = Tolerances::default();
        let r = 0.5;
        let res = canonical_decompose(&diag(&[r, 1.0, 0.8]), r, &tol).unwrap();
        let h1 = res.block(&[BlockType::T1]).unwrap();
        let h2 = res.block(&[BlockType::T2]).unwrap();
        assert_eq!((h1.dim(), h2.dim()), (2, 1));
        assert!(distance(&h1.projector(), &diag(&[1.0, 1.0, 0.0])) < 1e-12);
        assert!(!res.ambiguous);
        let d = defect_c1r(&diag(&[0.8]), r, &tol).unwrap().get(0, 0).re;
        assert!((d - 0.219375).abs() < 1e-15);
    }

    #[test]
    fn exact_operator_has_no_cnu_part() {
        let tol = Tolerances::default();
        let mut rng = rng_from_seed(9);
        let t = gen_exact_c1r(&mut rng, 4, 0.3);
        let res = canonical_decompose(&t, 0.3, &tol).unwrap();
        assert_eq!(res.block(&[BlockType::T2]).unwrap().dim(), 0);
    }

    #[test]
    fn examples_are_completely_non_unitary() {
        let tol = Tolerances::default();
        let s = SarasonShift::new(0.3, 0.5, 8).unwrap().matrix();
        assert_eq!(canonical_decompose(&s, 0.5, &tol).unwrap().block(&[BlockType::T1]).unwrap().dim(), 0);
        let t = gen_scalar_family(2, 0.5, 3).unwrap();
        assert_eq!(canonical_decompose(&t, 0.5, &tol).unwrap().block(&[BlockType::T1]).unwrap().dim(), 0);
    }

    #[test]
    fn non_member_is_rejected() {
        let tol = Tolerances::default();
        let err = canonical_decompose(&diag(&[1.2, 0.8]), 0.5, &tol).unwrap_err();
        assert!(matches!(err, Error::NotMember { .. }));
    }

    #[test]
    fn diagonal_pair_gives_four_blocks() {
        let tol = Tolerances::default();
        let r = 0.5;
        let t1 = diag(&[r, r, 0.8, 0.8]);
        let t2 = diag(&[1.0, 0.7, 1.0, 0.7]);
        let tuple = OperatorTuple::new(r, vec![t1, t2], &tol).unwrap();
        let res = tuple_decompose(&tuple, &tol).unwrap();
        let labels: Vec<alloc::string::String> = res.blocks.iter().map(Block::label_string).collect();
        assert_eq!(labels, ["t1,t1", "t1,t2", "t2,t1", "t2,t2"]);
        for (k, b) in res.blocks.iter().enumerate() {
            assert_eq!(b.dim(), 1);
            let mut e = [0.0; 4];
            e[k] = 1.0;
            assert!(distance(&b.projector(), &diag(&e)) < 1e-12);
        }
        assert!(res.projector_residual() < 1e-10);
    }

    #[test]
    fn exact_tuple_keeps_empty_blocks() {
        let tol = Tolerances::default();
        let r = 0.5;
        let tuple = OperatorTuple::new(r, vec![diag(&[r, 1.0]), diag(&[1.0, 1.0])], &tol).unwrap();
        let res = tuple_decompose(&tuple, &tol).unwrap();
        assert_eq!(res.blocks.len(), 4);
        assert_eq!(res.blocks[0].dim(), 2);
        assert!(res.blocks[1..].iter().all(|b| b.dim() == 0));
    }

    #[test]
    fn cross_reduction_basic_cases() {
        let tol = Tolerances::default();
        let r = 0.5;
        let a = diag(&[r, 0.8, 1.0]);
        let c = cross_reduction_check(&a, &ComplexMatrix::identity(3), r, &tol).unwrap();
        assert!(c.holds);
        let c1 = |x: f64| Complex64::new(x, 0.0);
        let j = ComplexMatrix::from_row_major(2, &[c1(0.6), c1(0.3), c1(0.0), c1(0.6)]).unwrap();
        let err = cross_reduction_check(&j, &j.scale_real(0.95), 0.2, &tol).unwrap_err();
        assert!(matches!(err, Error::NotDoublyCommuting { .. }));
    }

    #[test]
    fn qar_variant_uses_scaled_class() {
        let tol = Tolerances::default();
        let r = 0.5;
        let res = canonical_decompose_qar(&diag(&[r, 1.0 / r, 1.0]), r, &tol).unwrap();
        assert_eq!(res.block(&[BlockType::T1]).unwrap().dim(), 2);
    }
}
