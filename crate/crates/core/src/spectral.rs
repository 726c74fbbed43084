//! Polar (UD) factorization of doubly commuting tuples, the joint spectral
//! resolution of the positive parts, and dyadic snapping of their spectra
//! into `(r, 1)`.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::DMatrix;

use crate::classes::{classify, doubly_commuting_ops, OperatorTuple};
use crate::error::{Error, Result};
use crate::matrix::{hermitian_eig, operator_norm, polar_decompose, Basis, ComplexMatrix, Tolerances};
use crate::Complex64;

/// Consecutive eigenvalues closer than this (relative to the spectral scale)
/// belong to one cluster.
pub const CLUSTER_GAP: f64 = 1e-8;
/// Gaps in `[CLUSTER_GAP, AMBIGUITY_FACTOR * CLUSTER_GAP)` are reported as
/// ambiguous instead of being split silently.
pub const AMBIGUITY_FACTOR: f64 = 10.0;
/// Largest accepted dyadic level.
pub const MAX_SNAP_LEVEL: u32 = 48;

/// `T_j = U_j D_j` for every entry of a tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct UdFactorization {
    r: f64,
    ops: Vec<ComplexMatrix>,
    unitaries: Vec<ComplexMatrix>,
    positives: Vec<ComplexMatrix>,
    in_c1r: bool,
}

/// Residuals of the algebraic relations a UD factorization must satisfy.
/// Each value is a maximum over entries or over ordered pairs `i ≠ j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UdRelations {
    /// `‖T_j - U_j D_j‖`
    pub reconstruction: f64,
    /// `‖U_j*U_j - I‖_F`
    pub unitarity: f64,
    /// `‖U_iU_j - U_jU_i‖`
    pub unitaries_commute: f64,
    /// `‖D_iD_j - D_jD_i‖`
    pub positives_commute: f64,
    /// `‖U_iD_j - D_jU_i‖`
    pub unitary_positive_commute: f64,
    /// `‖T_iD_j - D_jT_i‖`
    pub tuple_positive_commute: f64,
}

impl UdRelations {
    pub fn max(&self) -> f64 {
        [
            self.reconstruction,
            self.unitarity,
            self.unitaries_commute,
            self.positives_commute,
            self.unitary_positive_commute,
            self.tuple_positive_commute,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

impl UdFactorization {
    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.ops[0].dim()
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn unitaries(&self) -> &[ComplexMatrix] {
        &self.unitaries
    }

    pub fn positives(&self) -> &[ComplexMatrix] {
        &self.positives
    }

    /// Whether every entry was certified in `C(1,r)`. When false the
    /// factorization is still valid but the positive parts need not have
    /// spectrum in `[r, 1]`.
    pub fn in_c1r(&self) -> bool {
        self.in_c1r
    }

    pub fn relations(&self) -> UdRelations {
        let d = self.len();
        let mut rel = UdRelations {
            reconstruction: 0.0,
            unitarity: 0.0,
            unitaries_commute: 0.0,
            positives_commute: 0.0,
            unitary_positive_commute: 0.0,
            tuple_positive_commute: 0.0,
        };
        for j in 0..d {
            let (u, dj) = (&self.unitaries[j], &self.positives[j]);
            rel.reconstruction = rel.reconstruction.max(operator_norm(&(&self.ops[j] - &(u * dj))));
            rel.unitarity = rel.unitarity.max(u.unitarity_residual());
        }
        for i in 0..d {
            for j in 0..d {
                if i == j {
                    continue;
                }
                let (ui, uj) = (&self.unitaries[i], &self.unitaries[j]);
                let (di, dj) = (&self.positives[i], &self.positives[j]);
                rel.unitaries_commute = rel.unitaries_commute.max(operator_norm(&ui.commutator(uj)));
                rel.positives_commute = rel.positives_commute.max(operator_norm(&di.commutator(dj)));
                rel.unitary_positive_commute = rel.unitary_positive_commute.max(operator_norm(&ui.commutator(dj)));
                rel.tuple_positive_commute = rel.tuple_positive_commute.max(operator_norm(&self.ops[i].commutator(dj)));
            }
        }
        rel
    }
}

/// Polar factorization of every entry of a doubly commuting tuple.
pub fn ud_factorize(tuple: &OperatorTuple, tol: &Tolerances) -> Result<UdFactorization> {
    let dc = doubly_commuting_ops(tuple.ops(), tol);
    if !dc.holds {
        return Err(Error::NotDoublyCommuting { residual: dc.max_residual });
    }
    let mut unitaries = Vec::with_capacity(tuple.len());
    let mut positives = Vec::with_capacity(tuple.len());
    let mut in_c1r = true;
    for t in tuple.ops() {
        let polar = polar_decompose(t, tol)?;
        unitaries.push(polar.unitary);
        positives.push(polar.positive);
        in_c1r &= classify(t, tuple.r(), tol)?.c1r.member;
    }
    Ok(UdFactorization { r: tuple.r(), ops: tuple.ops().to_vec(), unitaries, positives, in_c1r })
}

/// Spectral data of one tuple entry: distinct ascending eigenvalues and the
/// matching orthogonal projections.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryResolution {
    pub eigenvalues: Vec<f64>,
    pub projections: Vec<ComplexMatrix>,
}

impl EntryResolution {
    /// `Σ_α f(λ_α) P_α`.
    pub fn functional_calculus(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.projections[0].dim();
        self.eigenvalues
            .iter()
            .zip(&self.projections)
            .fold(ComplexMatrix::zeros(n), |acc, (&l, p)| &acc + &p.scale_real(f(l)))
    }

    /// Largest of the idempotence, self-adjointness, orthogonality and
    /// completeness residuals.
    pub fn projection_residual(&self) -> f64 {
        let n = self.projections[0].dim();
        let mut worst = 0.0f64;
        let mut sum = ComplexMatrix::zeros(n);
        for (a, p) in self.projections.iter().enumerate() {
            worst = worst.max(operator_norm(&(&(p * p) - p)));
            worst = worst.max(operator_norm(&(p - &p.adjoint())));
            for q in &self.projections[a + 1..] {
                worst = worst.max(operator_norm(&(p * q)));
            }
            sum = &sum + p;
        }
        worst.max(operator_norm(&(&sum - &ComplexMatrix::identity(n))))
    }
}

/// A joint eigenspace of all positive parts.
#[derive(Debug, Clone, PartialEq)]
pub struct JointAtom {
    /// Cluster index `α_j` for every entry.
    pub indices: Vec<usize>,
    /// `λ_{j, α_j}` for every entry.
    pub values: Vec<f64>,
    pub basis: Basis,
}

/// Per-entry and joint spectral projections of the positive parts.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResolution {
    entries: Vec<EntryResolution>,
    atoms: Vec<JointAtom>,
}

impl SpectralResolution {
    pub fn entries(&self) -> &[EntryResolution] {
        &self.entries
    }

    pub fn entry(&self, j: usize) -> &EntryResolution {
        &self.entries[j]
    }

    /// Joint eigenspaces, ordered lexicographically by cluster indices.
    pub fn atoms(&self) -> &[JointAtom] {
        &self.atoms
    }

    /// `max_j ‖Σ_α λ_{j,α} P_{j,α} - D_j‖`.
    pub fn reconstruction_residual(&self, positives: &[ComplexMatrix]) -> f64 {
        self.entries
            .iter()
            .zip(positives)
            .map(|(e, d)| operator_norm(&(&e.functional_calculus(|l| l) - d)))
            .fold(0.0, f64::max)
    }

    /// Largest of `‖P_{i,β}P_{j,α} - P_{j,α}P_{i,β}‖` and
    /// `‖U_kP_{i,β} - P_{i,β}U_k‖` over `i ≠ j`, `i ≠ k`.
    pub fn cross_commutation_residual(&self, unitaries: &[ComplexMatrix]) -> f64 {
        let mut worst = 0.0f64;
        for (i, ei) in self.entries.iter().enumerate() {
            for p in &ei.projections {
                for (j, ej) in self.entries.iter().enumerate() {
                    if j != i {
                        for q in &ej.projections {
                            worst = worst.max(operator_norm(&p.commutator(q)));
                        }
                    }
                }
                for (k, u) in unitaries.iter().enumerate() {
                    if k != i {
                        worst = worst.max(operator_norm(&u.commutator(p)));
                    }
                }
            }
        }
        worst
    }
}

/// Splits a sorted slice into clusters of consecutive values whose gaps are
/// below `gap`. Gaps between `gap` and `AMBIGUITY_FACTOR * gap` are errors.
fn cluster_sorted(values: &[f64], gap: f64) -> Result<Vec<core::ops::Range<usize>>> {
    let mut clusters = Vec::new();
    let mut start = 0;
    for k in 1..values.len() {
        let g = values[k] - values[k - 1];
        if g < gap {
            continue;
        }
        if g < AMBIGUITY_FACTOR * gap {
            return Err(Error::ClusterAmbiguity { gap: g });
        }
        clusters.push(start..k);
        start = k;
    }
    if !values.is_empty() {
        clusters.push(start..values.len());
    }
    Ok(clusters)
}

/// Simultaneous eigenspaces of commuting Hermitian matrices, refined one
/// matrix at a time. Returns each block with its per-matrix eigenvalue.
fn joint_blocks(mats: &[ComplexMatrix], tol: &Tolerances) -> Result<Vec<(Basis, Vec<f64>)>> {
    let n = mats[0].dim();
    let scale = mats.iter().map(operator_norm).fold(1.0, f64::max);
    let gap = CLUSTER_GAP * scale;
    let mut blocks = vec![(Basis::full(n), Vec::new())];
    for m in mats {
        let mut next = Vec::with_capacity(blocks.len());
        for (basis, values) in blocks {
            let compressed = basis.compress(m).ok_or(Error::EmptyTuple)?;
            let eig = hermitian_eig(&compressed.hermitian_part(), tol)?;
            let q = eig.eigenvectors.as_dmatrix();
            for range in cluster_sorted(&eig.eigenvalues, gap)? {
                let cols = q.columns(range.start, range.len()).into_owned();
                let sub = Basis::from_orthonormal(basis.as_dmatrix() * cols);
                let mean = eig.eigenvalues[range.clone()].iter().sum::<f64>() / range.len() as f64;
                let mut vals = values.clone();
                vals.push(mean);
                next.push((sub, vals));
            }
        }
        blocks = next;
    }
    Ok(blocks)
}

/// Joint spectral resolution of the commuting positive parts.
///
/// Eigenvalues of each entry are clustered with gap [`CLUSTER_GAP`]; the
/// cluster value is `tr(P D)/rank(P)`. Clusters are ordered by ascending
/// eigenvalue.
pub fn joint_spectral_resolution(fact: &UdFactorization, tol: &Tolerances) -> Result<SpectralResolution> {
    resolve_commuting(fact.positives(), tol)
}

/// Joint spectral resolution of any family of commuting Hermitian matrices.
pub fn resolve_commuting(mats: &[ComplexMatrix], tol: &Tolerances) -> Result<SpectralResolution> {
    let n = mats.first().ok_or(Error::EmptyTuple)?.dim();
    let dc = doubly_commuting_ops(mats, tol);
    if !dc.holds {
        return Err(Error::NotDoublyCommuting { residual: dc.max_residual });
    }
    let blocks = joint_blocks(mats, tol)?;
    let scale = mats.iter().map(operator_norm).fold(1.0, f64::max);
    let gap = CLUSTER_GAP * scale;

    let d = mats.len();
    let mut entries = Vec::with_capacity(d);
    let mut block_index = vec![vec![0usize; d]; blocks.len()];
    for (j, m) in mats.iter().enumerate() {
        // Blocks from different branches of the refinement may carry the
        // same eigenvalue; merge them by clustering the block values.
        let mut order: Vec<usize> = (0..blocks.len()).collect();
        order.sort_by(|&a, &b| blocks[a].1[j].total_cmp(&blocks[b].1[j]));
        let sorted: Vec<f64> = order.iter().map(|&b| blocks[b].1[j]).collect();
        let mut eigenvalues = Vec::new();
        let mut projections = Vec::new();
        for (alpha, range) in cluster_sorted(&sorted, gap)?.into_iter().enumerate() {
            let mut p = ComplexMatrix::zeros(n);
            let mut rank = 0;
            for &b in &order[range] {
                block_index[b][j] = alpha;
                p = &p + &blocks[b].0.projector();
                rank += blocks[b].0.rank();
            }
            let p = p.hermitian_part();
            eigenvalues.push((&p * m).trace().re / rank as f64);
            projections.push(p);
        }
        entries.push(EntryResolution { eigenvalues, projections });
    }

    let mut keyed: Vec<(Vec<usize>, Basis)> = Vec::new();
    for (b, (basis, _)) in blocks.into_iter().enumerate() {
        let key = &block_index[b];
        match keyed.iter_mut().find(|(k, _)| k == key) {
            Some((_, existing)) => {
                let stacked = hstack(existing.as_dmatrix(), basis.as_dmatrix());
                *existing = Basis::from_orthonormal(stacked);
            }
            None => keyed.push((key.clone(), basis)),
        }
    }
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    let atoms = keyed
        .into_iter()
        .map(|(indices, basis)| {
            let values = indices.iter().enumerate().map(|(j, &a)| entries[j].eigenvalues[a]).collect();
            JointAtom { indices, values, basis }
        })
        .collect();
    Ok(SpectralResolution { entries, atoms })
}

fn hstack(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// The dyadic midpoint nearest to `lambda`:
/// `r + (k + 1/2)(1 - r)/2^m` with `k` clamped to `0..2^m`.
pub fn snap_value(lambda: f64, r: f64, level: u32) -> f64 {
    let cells = (1u64 << level) as f64;
    let step = (1.0 - r) / cells;
    let k = ((lambda - r) / step).floor().clamp(0.0, cells - 1.0);
    r + (k + 0.5) * step
}

/// Snapped positive parts and tuple at one dyadic level, with the measured
/// approximation errors.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicApproximation {
    pub level: u32,
    /// `D_{m,j}`.
    pub snapped: Vec<ComplexMatrix>,
    /// `T_{m,j} = U_j D_{m,j}`.
    pub snapped_tuple: Vec<ComplexMatrix>,
    /// Resolution of the snapped positive parts (same projections, merged
    /// where two clusters snap to one grid point).
    pub resolution: SpectralResolution,
    /// `2^{-m}`.
    pub bound: f64,
    /// `r^{-2} 2^{-m}`.
    pub inverse_bound: f64,
    /// `max_j ‖T_{m,j} - T_j‖`.
    pub forward_error: f64,
    /// `max_j ‖T_{m,j}^{-1} - T_j^{-1}‖`.
    pub inverse_error: f64,
}

/// Snaps the spectrum of every positive part to the dyadic midpoint grid of
/// `(r, 1)` at level `m`.
pub fn snap_spectrum(fact: &UdFactorization, level: u32, tol: &Tolerances) -> Result<DyadicApproximation> {
    let res = joint_spectral_resolution(fact, tol)?;
    snap_resolution(fact, &res, level, tol)
}

/// [`snap_spectrum`] with a precomputed resolution.
pub fn snap_resolution(
    fact: &UdFactorization,
    res: &SpectralResolution,
    level: u32,
    tol: &Tolerances,
) -> Result<DyadicApproximation> {
    if level == 0 || level > MAX_SNAP_LEVEL {
        return Err(Error::InvalidParameter("snap level must lie in 1..=48"));
    }
    let r = fact.r();
    for e in res.entries() {
        for &l in &e.eigenvalues {
            if l < r - tol.eq_tol() || l > 1.0 + tol.eq_tol() {
                return Err(Error::SpectrumOutsideBand { eigenvalue: l });
            }
        }
    }
    let mut entries = Vec::with_capacity(res.entries().len());
    for e in res.entries() {
        let mut eigenvalues: Vec<f64> = Vec::new();
        let mut projections: Vec<ComplexMatrix> = Vec::new();
        for (&l, p) in e.eigenvalues.iter().zip(&e.projections) {
            let s = snap_value(l, r, level);
            match eigenvalues.last() {
                Some(&prev) if prev == s => {
                    let last = projections.last_mut().expect("paired with eigenvalues");
                    *last = &*last + p;
                }
                _ => {
                    eigenvalues.push(s);
                    projections.push(p.clone());
                }
            }
        }
        entries.push(EntryResolution { eigenvalues, projections });
    }
    let atoms = res
        .atoms()
        .iter()
        .map(|a| JointAtom {
            indices: a.indices.clone(),
            values: a.values.iter().map(|&l| snap_value(l, r, level)).collect(),
            basis: a.basis.clone(),
        })
        .collect();
    let resolution = SpectralResolution { entries, atoms };

    let mut snapped = Vec::with_capacity(fact.len());
    let mut snapped_tuple = Vec::with_capacity(fact.len());
    let mut forward_error = 0.0f64;
    let mut inverse_error = 0.0f64;
    for (j, e) in resolution.entries().iter().enumerate() {
        let dm = e.functional_calculus(|l| l);
        let dm_inv = e.functional_calculus(|l| 1.0 / l);
        let u = &fact.unitaries()[j];
        let tm = u * &dm;
        let tm_inv = &dm_inv * &u.adjoint();
        let t_inv = fact.ops()[j].inverse(tol)?;
        forward_error = forward_error.max(operator_norm(&(&tm - &fact.ops()[j])));
        inverse_error = inverse_error.max(operator_norm(&(&tm_inv - &t_inv)));
        snapped.push(dm);
        snapped_tuple.push(tm);
    }
    let bound = 1.0 / (1u64 << level) as f64;
    Ok(DyadicApproximation {
        level,
        snapped,
        snapped_tuple,
        resolution,
        bound,
        inverse_bound: bound / (r * r),
        forward_error,
        inverse_error,
    })
}
