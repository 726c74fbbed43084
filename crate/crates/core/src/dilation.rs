//! Dilation of doubly commuting `C(1,r)` tuples with finite spectrum.
//!
//! Each entry `T_j = U_j Σ_α λ_{j,α} P_{j,α}` gets the boundary symbol
//! `F_j(z) = Σ_α v_{j,α}(z) U_j P_{j,α}` where `v_{j,α}` is the annulus map
//! recentered so that `v_{j,α}(0) = λ_{j,α}`. The space `L²(T) ⊗ H` is
//! discretized by `N` equally weighted nodes on the circle, so `M_j` is the
//! block diagonal matrix of node values and `V h = (h, …, h)/√N`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::classes::{classify, defect_c1r, defect_qar, double_commutation_residual, OperatorTuple};
use crate::conformal::{AnnulusMap, RecenteredSymbol, EXCEPTIONAL_RADIUS};
use crate::error::{Error, Result};
use crate::matrix::{hermitian_eig, operator_norm, ComplexMatrix, Tolerances};
use crate::spectral::{joint_spectral_resolution, snap_resolution, ud_factorize, EntryResolution};
use crate::Complex64;

/// Largest `|n_j|` accepted by the moment check.
pub const MAX_MOMENT_POWER: i32 = 12;
/// Snap level used when the caller does not pick one.
pub const DEFAULT_SNAP_LEVEL: u32 = 20;

const OFFSET_START: f64 = 0.381966011250105;
const OFFSET_STEP: f64 = 0.618033988749895;
const OFFSET_TRIES: usize = 64;

/// What to do with eigenvalues of `|T_j|` that are not strictly inside
/// `(r, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapPolicy {
    /// Fail with [`Error::NeedsSnapping`].
    Never,
    /// Snap at the given level only if some eigenvalue needs it.
    WhenNeeded(u32),
    /// Always snap at the given level.
    Always(u32),
}

impl Default for SnapPolicy {
    fn default() -> Self {
        SnapPolicy::WhenNeeded(DEFAULT_SNAP_LEVEL)
    }
}

/// How strictly the node offset must clear the exceptional points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OffsetPolicy {
    /// Require clearance `π/(4N)`; fail otherwise.
    Strict,
    /// Fall back to the candidate with the largest clearance.
    #[default]
    BestEffort,
}

/// Measured effect of dyadic snapping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapInfo {
    pub level: u32,
    pub bound: f64,
    pub inverse_bound: f64,
    pub forward_error: f64,
    pub inverse_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct EntrySymbol {
    symbols: Vec<RecenteredSymbol>,
    /// `U_j P_{j,α}`.
    forward: Vec<ComplexMatrix>,
    /// `P_{j,α} U_j*`.
    backward: Vec<ComplexMatrix>,
}

/// The boundary symbols `F_1, …, F_d` of a tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFamily {
    r: f64,
    dim: usize,
    entries: Vec<EntrySymbol>,
    target: Vec<ComplexMatrix>,
    snap: Option<SnapInfo>,
}

impl SymbolFamily {
    /// Factorizes the tuple, resolves the spectrum of the positive parts
    /// (snapping it according to `policy`) and recenters one annulus map per
    /// eigenvalue.
    pub fn build(tuple: &OperatorTuple, policy: SnapPolicy, tol: &Tolerances) -> Result<Self> {
        let r = tuple.r();
        let fact = ud_factorize(tuple, tol)?;
        let res = joint_spectral_resolution(&fact, tol)?;
        let needs_snap = res
            .entries()
            .iter()
            .flat_map(|e| e.eigenvalues.iter())
            .find(|&&l| l <= r + tol.eq_tol() || l >= 1.0 - tol.eq_tol());
        let level = match (policy, needs_snap) {
            (SnapPolicy::Never, Some(&l)) => return Err(Error::NeedsSnapping { eigenvalue: l }),
            (SnapPolicy::Never, None) | (SnapPolicy::WhenNeeded(_), None) => None,
            (SnapPolicy::WhenNeeded(m), Some(_)) | (SnapPolicy::Always(m), _) => Some(m),
        };
        let (resolution, target, snap) = match level {
            None => (res, tuple.ops().to_vec(), None),
            Some(m) => {
                let approx = snap_resolution(&fact, &res, m, tol)?;
                let info = SnapInfo {
                    level: m,
                    bound: approx.bound,
                    inverse_bound: approx.inverse_bound,
                    forward_error: approx.forward_error,
                    inverse_error: approx.inverse_error,
                };
                (approx.resolution, approx.snapped_tuple, Some(info))
            }
        };
        let map = AnnulusMap::new(r)?;
        let entries = resolution
            .entries()
            .iter()
            .zip(fact.unitaries())
            .map(|(e, u)| entry_symbol(map, e, u))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { r, dim: tuple.dim(), entries, target, snap })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The tuple the symbols reproduce at `z = 0`: the input, or its
    /// snapped approximation.
    pub fn target(&self) -> &[ComplexMatrix] {
        &self.target
    }

    pub fn snap(&self) -> Option<SnapInfo> {
        self.snap
    }

    /// `λ_{j,α}` for entry `j`.
    pub fn eigenvalues(&self, j: usize) -> Vec<f64> {
        self.entries[j].symbols.iter().map(|s| s.lambda()).collect()
    }

    /// Exceptional points of every recentered symbol.
    pub fn exceptional_points(&self) -> Vec<Complex64> {
        self.entries.iter().flat_map(|e| e.symbols.iter().flat_map(|s| s.exceptional_points())).collect()
    }

    /// `F_j(z)`.
    pub fn eval(&self, j: usize, z: Complex64) -> Result<ComplexMatrix> {
        let e = &self.entries[j];
        let mut acc = ComplexMatrix::zeros(self.dim);
        for (s, g) in e.symbols.iter().zip(&e.forward) {
            acc = &acc + &g.scale(s.eval(z)?);
        }
        Ok(acc)
    }

    /// `F_j(z)^{-1} = Σ_α v_{j,α}(z)^{-1} P_{j,α} U_j*`.
    pub fn eval_inverse(&self, j: usize, z: Complex64) -> Result<ComplexMatrix> {
        let e = &self.entries[j];
        let mut acc = ComplexMatrix::zeros(self.dim);
        for (s, h) in e.symbols.iter().zip(&e.backward) {
            acc = &acc + &h.scale(s.eval(z)?.inv());
        }
        Ok(acc)
    }
}

fn entry_symbol(map: AnnulusMap, e: &EntryResolution, u: &ComplexMatrix) -> Result<EntrySymbol> {
    let symbols = e.eigenvalues.iter().map(|&l| RecenteredSymbol::new(map, l)).collect::<Result<Vec<_>>>()?;
    let forward = e.projections.iter().map(|p| u * p).collect();
    let ustar = u.adjoint();
    let backward = e.projections.iter().map(|p| p * &ustar).collect();
    Ok(EntrySymbol { symbols, forward, backward })
}

/// Which class the node blocks of a model belong to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelClass {
    /// Blocks in the exact `C(1,r)` class.
    C1r { r: f64 },
    /// Blocks in the exact `QA(r)` class, obtained as `r^{-1}` times a
    /// `C(1,r²)` model.
    QAr { r: f64 },
}

/// Quadrature-discretized dilation: nodes, node blocks and the embedding.
///
/// Node blocks are evaluated on demand from the symbol family.
#[derive(Debug, Clone, PartialEq)]
pub struct DilationModel {
    symbols: SymbolFamily,
    class: ModelClass,
    scale: f64,
    theta0: f64,
    clearance: f64,
    clearance_ok: bool,
    nodes: Vec<Complex64>,
}

/// Offset `θ₀` chosen for a node count, with the distance from the nearest
/// node to the nearest exceptional point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeOffset {
    pub theta0: f64,
    pub clearance: f64,
    pub admissible: bool,
}

/// Candidate offsets: the golden-ratio sequence restricted to `[0.1, 0.9)`.
pub fn offset_candidates() -> impl Iterator<Item = f64> {
    (0..OFFSET_TRIES).map(|k| (OFFSET_START + k as f64 * OFFSET_STEP).fract()).filter(|t| (0.1..0.9).contains(t))
}

/// `x mod 1` in `[0, 1)`.
fn unit_fraction(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Angular distance from the grid `exp(2πi(k + θ₀)/N)` to the nearest of
/// `points`.
pub fn grid_clearance(points: &[Complex64], n: usize, theta0: f64) -> f64 {
    let spacing = 2.0 * PI / n as f64;
    points
        .iter()
        .map(|p| {
            let x = unit_fraction(p.arg() / spacing - theta0);
            x.min(1.0 - x) * spacing
        })
        .fold(f64::INFINITY, f64::min)
}

/// First candidate offset whose grid clears every point by `π/(4N)`, or the
/// best candidate when none does.
pub fn choose_offset(points: &[Complex64], n: usize) -> NodeOffset {
    let required = PI / (4.0 * n as f64);
    let mut best = NodeOffset { theta0: OFFSET_START, clearance: -1.0, admissible: false };
    for theta0 in offset_candidates() {
        let clearance = grid_clearance(points, n, theta0);
        if clearance >= required {
            return NodeOffset { theta0, clearance, admissible: true };
        }
        if clearance > best.clearance {
            best = NodeOffset { theta0, clearance, admissible: false };
        }
    }
    best
}

/// Builds the `N`-node model of a symbol family.
pub fn build_dilation(symbols: &SymbolFamily, n: usize, policy: OffsetPolicy) -> Result<DilationModel> {
    model_from_symbols(symbols.clone(), ModelClass::C1r { r: symbols.r() }, 1.0, n, policy)
}

fn model_from_symbols(
    symbols: SymbolFamily,
    class: ModelClass,
    scale: f64,
    n: usize,
    policy: OffsetPolicy,
) -> Result<DilationModel> {
    if n < 16 || !n.is_power_of_two() {
        return Err(Error::InvalidNodeCount(n));
    }
    let offset = choose_offset(&symbols.exceptional_points(), n);
    if !offset.admissible && (policy == OffsetPolicy::Strict || offset.clearance <= EXCEPTIONAL_RADIUS) {
        return Err(Error::NoAdmissibleOffset);
    }
    let nodes = (0..n).map(|k| Complex64::from_polar(1.0, 2.0 * PI * (k as f64 + offset.theta0) / n as f64)).collect();
    Ok(DilationModel {
        symbols,
        class,
        scale,
        theta0: offset.theta0,
        clearance: offset.clearance,
        clearance_ok: offset.admissible,
        nodes,
    })
}

/// Builds the symbol family and the model in one step.
pub fn dilate(
    tuple: &OperatorTuple,
    n: usize,
    snap: SnapPolicy,
    offset: OffsetPolicy,
    tol: &Tolerances,
) -> Result<DilationModel> {
    let symbols = SymbolFamily::build(tuple, snap, tol)?;
    build_dilation(&symbols, n, offset)
}

/// Dilation of a `QA(r)` tuple through the `C(1,r²)` model of `rT`, with
/// node blocks scaled by `r^{-1}`.
pub fn dilate_qar(
    tuple: &OperatorTuple,
    n: usize,
    snap: SnapPolicy,
    offset: OffsetPolicy,
    tol: &Tolerances,
) -> Result<DilationModel> {
    let r = tuple.r();
    for (index, t) in tuple.ops().iter().enumerate() {
        let cert = classify(t, r, tol)?.qar;
        if !cert.member {
            let witness = cert.witness_norms.0.max(cert.witness_norms.1);
            return Err(Error::NotMember { index, class: "QAr", witness });
        }
    }
    let scaled_ops = tuple.ops().iter().map(|t| t.scale_real(r)).collect();
    let scaled = OperatorTuple::new(r * r, scaled_ops, tol)?;
    let symbols = SymbolFamily::build(&scaled, snap, tol)?;
    model_from_symbols(symbols, ModelClass::QAr { r }, 1.0 / r, n, offset)
}

/// Worst-case node measurements of a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeClassReport {
    /// Largest distance from an eigenvalue of `B*B` to the two allowed
    /// moduli squared, over nodes and entries.
    pub spectral_residual: f64,
    /// Largest norm of the exact-class defect of a node block.
    pub defect_residual: f64,
    /// Largest double-commutation residual among the blocks of one node.
    pub double_commutation: f64,
    /// Smallest singular value of any node block.
    pub min_singular_value: f64,
}

/// `‖T^n - V*M^nV‖` for every multi-index in `[-p, p]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub max_power: i32,
    pub powers: Vec<Vec<i32>>,
    pub errors: Vec<f64>,
}

impl MomentTable {
    pub fn max_error(&self) -> f64 {
        self.errors.iter().copied().fold(0.0, f64::max)
    }

    /// Multi-index attaining the largest error.
    pub fn argmax(&self) -> &[i32] {
        let k = (0..self.errors.len()).fold(0, |b, k| if self.errors[k] > self.errors[b] { k } else { b });
        &self.powers[k]
    }

    pub fn error_at(&self, power: &[i32]) -> Option<f64> {
        self.powers.iter().position(|p| p == power).map(|k| self.errors[k])
    }
}

impl DilationModel {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    /// Smallest angular distance between a node and an exceptional point.
    pub fn clearance(&self) -> f64 {
        self.clearance
    }

    /// Whether the offset met the `π/(4N)` clearance requirement.
    pub fn clearance_ok(&self) -> bool {
        self.clearance_ok
    }

    pub fn class(&self) -> ModelClass {
        self.class
    }

    /// Factor applied to the symbol values (`1` or `r^{-1}`).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn dim(&self) -> usize {
        self.symbols.dim()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &SymbolFamily {
        &self.symbols
    }

    pub fn snap(&self) -> Option<SnapInfo> {
        self.symbols.snap()
    }

    /// The tuple this model dilates exactly in the limit `N → ∞`.
    pub fn target(&self) -> Vec<ComplexMatrix> {
        self.symbols.target().iter().map(|t| t.scale_real(self.scale)).collect()
    }

    /// Block `j` at node `k`.
    pub fn block(&self, k: usize, j: usize) -> Result<ComplexMatrix> {
        Ok(self.symbols.eval(j, self.nodes[k])?.scale_real(self.scale))
    }

    pub fn block_inverse(&self, k: usize, j: usize) -> Result<ComplexMatrix> {
        Ok(self.symbols.eval_inverse(j, self.nodes[k])?.scale_real(1.0 / self.scale))
    }

    /// `‖V*V - I‖` where `V = (I, …, I)/√N`.
    pub fn isometry_residual(&self) -> f64 {
        let w = 1.0 / (self.node_count() as f64).sqrt();
        let gram: f64 = self.nodes.iter().map(|_| w * w).sum();
        (gram - 1.0).abs()
    }

    /// Checks every node block against the exact class of the model.
    pub fn verify_node_class(&self, tol: &Tolerances) -> Result<NodeClassReport> {
        let (lo, hi) = match self.class {
            ModelClass::C1r { r } => (r * r, 1.0),
            ModelClass::QAr { r } => (r * r, 1.0 / (r * r)),
        };
        let mut report = NodeClassReport {
            spectral_residual: 0.0,
            defect_residual: 0.0,
            double_commutation: 0.0,
            min_singular_value: f64::INFINITY,
        };
        for k in 0..self.node_count() {
            let blocks = (0..self.len()).map(|j| self.block(k, j)).collect::<Result<Vec<_>>>()?;
            for b in &blocks {
                let gram = hermitian_eig(&(&b.adjoint() * b).hermitian_part(), tol)?;
                for &x in &gram.eigenvalues {
                    let dist = ((x - lo).abs() / lo.max(1.0)).min((x - hi).abs() / hi.max(1.0));
                    report.spectral_residual = report.spectral_residual.max(dist);
                }
                report.min_singular_value = report.min_singular_value.min(gram.eigenvalues[0].max(0.0).sqrt());
                let defect = match self.class {
                    ModelClass::C1r { r } => defect_c1r(b, r, tol)?,
                    ModelClass::QAr { r } => defect_qar(b, r, tol)?,
                };
                report.defect_residual = report.defect_residual.max(operator_norm(&defect));
            }
            report.double_commutation = report.double_commutation.max(double_commutation_residual(&blocks));
        }
        Ok(report)
    }

    /// `(1/N) Σ_k Π_j B_j(ζ_k)^{n_j}` for every `n ∈ [-p, p]^d`, in the
    /// lexicographic order of [`multi_indices`].
    pub fn moments(&self, max_power: i32) -> Result<Vec<ComplexMatrix>> {
        if !(0..=MAX_MOMENT_POWER).contains(&max_power) {
            return Err(Error::PowerTooLarge(max_power));
        }
        let d = self.len();
        let dim = self.dim();
        let width = (2 * max_power + 1) as usize;
        let count = width.pow(d as u32);
        let mut sums = vec![ComplexMatrix::zeros(dim); count];
        let weight = 1.0 / self.node_count() as f64;
        for k in 0..self.node_count() {
            let powers = (0..d).map(|j| self.block_powers(k, j, max_power)).collect::<Result<Vec<_>>>()?;
            accumulate_products(&powers, &mut sums, width);
        }
        Ok(sums.into_iter().map(|s| s.scale_real(weight)).collect())
    }

    /// `B^{-p}, …, B^{p}` at node `k`.
    fn block_powers(&self, k: usize, j: usize, p: i32) -> Result<Vec<ComplexMatrix>> {
        let b = self.block(k, j)?;
        let binv = self.block_inverse(k, j)?;
        let mut neg = vec![ComplexMatrix::identity(self.dim())];
        let mut pos = vec![ComplexMatrix::identity(self.dim())];
        for _ in 0..p {
            let next_pos = pos.last().map(|m| m * &b).expect("nonempty");
            let next_neg = neg.last().map(|m| m * &binv).expect("nonempty");
            pos.push(next_pos);
            neg.push(next_neg);
        }
        let mut out: Vec<ComplexMatrix> = neg.into_iter().skip(1).rev().collect();
        out.extend(pos);
        Ok(out)
    }

    /// Compares the moments with the monomials of `ops`.
    pub fn verify_moments(&self, ops: &[ComplexMatrix], max_power: i32, tol: &Tolerances) -> Result<MomentTable> {
        if ops.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: ops.len() });
        }
        let moments = self.moments(max_power)?;
        let powers = multi_indices(self.len(), max_power);
        let reference = monomials(ops, max_power, tol)?;
        let errors = moments.iter().zip(&reference).map(|(m, t)| operator_norm(&(m - t))).collect();
        Ok(MomentTable { max_power, powers, errors })
    }
}

/// All of `[-p, p]^d` in lexicographic order.
pub fn multi_indices(d: usize, p: i32) -> Vec<Vec<i32>> {
    let width = (2 * p + 1) as usize;
    let count = width.pow(d as u32);
    (0..count)
        .map(|mut idx| {
            let mut n = vec![0; d];
            for slot in n.iter_mut().rev() {
                *slot = (idx % width) as i32 - p;
                idx /= width;
            }
            n
        })
        .collect()
}

/// `T_1^{n_1} ⋯ T_d^{n_d}` for every `n ∈ [-p, p]^d`.
pub fn monomials(ops: &[ComplexMatrix], p: i32, tol: &Tolerances) -> Result<Vec<ComplexMatrix>> {
    if !(0..=MAX_MOMENT_POWER).contains(&p) {
        return Err(Error::PowerTooLarge(p));
    }
    let width = (2 * p + 1) as usize;
    let dim = ops.first().ok_or(Error::EmptyTuple)?.dim();
    let powers =
        ops.iter().map(|t| (-p..=p).map(|n| t.powi(n, tol)).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?;
    let mut out = vec![ComplexMatrix::zeros(dim); width.pow(ops.len() as u32)];
    accumulate_products(&powers, &mut out, width);
    Ok(out)
}

/// Adds `Π_j powers[j][i_j]` to `sums[i]` for every multi-index, reusing
/// prefix products.
fn accumulate_products(powers: &[Vec<ComplexMatrix>], sums: &mut [ComplexMatrix], width: usize) {
    let d = powers.len();
    let mut prefix: Vec<ComplexMatrix> = Vec::with_capacity(d);
    let mut digits = vec![0usize; d];
    for (flat, sum) in sums.iter_mut().enumerate() {
        // The first position whose digit changed since the previous index.
        let changed = if flat == 0 { 0 } else { (0..d).rev().find(|&j| digits[j] != 0).map_or(0, |j| j) };
        prefix.truncate(changed);
        for j in changed..d {
            let next = match prefix.last() {
                Some(acc) => acc * &powers[j][digits[j]],
                None => powers[j][digits[j]].clone(),
            };
            prefix.push(next);
        }
        *sum = &*sum + &prefix[d - 1];
        for j in (0..d).rev() {
            digits[j] += 1;
            if digits[j] < width {
                break;
            }
            digits[j] = 0;
        }
    }
}
