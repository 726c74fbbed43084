//! Membership certificates for `C(1,r)`, `QA(r)` and their exact-defect
//! subclasses, the scaling correspondence between them, and the doubly
//! commuting predicate.
//!
//! Every certificate is computed along two routes (norms or spectra on one
//! side, the defect operator on the other) and records whether they agree.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::matrix::{hermitian_eig, operator_norm, ComplexMatrix, Tolerances};

/// A tuple of invertible matrices on a common space together with the inner
/// radius `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorTuple {
    r: f64,
    ops: Vec<ComplexMatrix>,
}

impl OperatorTuple {
    pub fn new(r: f64, ops: Vec<ComplexMatrix>, tol: &Tolerances) -> Result<Self> {
        validate_radius(r, tol)?;
        let first = ops.first().ok_or(Error::EmptyTuple)?;
        let dim = first.dim();
        for op in &ops {
            if op.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: op.dim() });
            }
            require_invertible(op, tol)?;
        }
        Ok(Self { r, ops })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    /// Number of entries `d`.
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.ops[0].dim()
    }

    /// Same operators with a different radius.
    pub fn with_radius(&self, r: f64, tol: &Tolerances) -> Result<Self> {
        validate_radius(r, tol)?;
        Ok(Self { r, ops: self.ops.clone() })
    }

    /// `T_1^{n_1} ... T_d^{n_d}`.
    pub fn monomial(&self, powers: &[i32], tol: &Tolerances) -> Result<ComplexMatrix> {
        if powers.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: powers.len() });
        }
        let mut acc = ComplexMatrix::identity(self.dim());
        for (op, &n) in self.ops.iter().zip(powers) {
            acc = &acc * &op.powi(n, tol)?;
        }
        Ok(acc)
    }
}

/// Checks `r ∈ (kernel_tol, 1 - kernel_tol)`.
pub fn validate_radius(r: f64, tol: &Tolerances) -> Result<()> {
    if r.is_finite() && r > tol.kernel_tol() && r < 1.0 - tol.kernel_tol() {
        Ok(())
    } else {
        Err(Error::InvalidRadius(r))
    }
}

/// Returns the smallest singular value, or an error when it does not exceed
/// `kernel_tol`.
pub fn require_invertible(t: &ComplexMatrix, tol: &Tolerances) -> Result<f64> {
    let smin = t.smallest_singular_value();
    if smin > tol.kernel_tol() {
        Ok(smin)
    } else {
        Err(Error::Singular { smallest_singular_value: smin })
    }
}

/// `(1 + r²) I - T*T - r² T⁻¹T⁻*`.
pub fn defect_c1r(t: &ComplexMatrix, r: f64, tol: &Tolerances) -> Result<ComplexMatrix> {
    defect(t, 1.0 + r * r, r * r, tol)
}

/// `(r⁻² + r²) I - T*T - T⁻¹T⁻*`.
pub fn defect_qar(t: &ComplexMatrix, r: f64, tol: &Tolerances) -> Result<ComplexMatrix> {
    defect(t, 1.0 / (r * r) + r * r, 1.0, tol)
}

fn defect(t: &ComplexMatrix, diag: f64, inv_weight: f64, tol: &Tolerances) -> Result<ComplexMatrix> {
    let inv = t.inverse(tol)?;
    let n = t.dim();
    let gram = &t.adjoint() * t;
    let inv_gram = &inv * &inv.adjoint();
    let d = &(&ComplexMatrix::identity(n).scale_real(diag) - &gram) - &inv_gram.scale_real(inv_weight);
    Ok(d.hermitian_part())
}

/// The four classes a single operator is tested against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassTag {
    C1r,
    QAr,
    ExactC1r,
    ExactQAr,
}

impl ClassTag {
    pub const ALL: [ClassTag; 4] = [ClassTag::C1r, ClassTag::QAr, ClassTag::ExactC1r, ClassTag::ExactQAr];

    pub fn name(self) -> &'static str {
        match self {
            ClassTag::C1r => "C1r",
            ClassTag::QAr => "QAr",
            ClassTag::ExactC1r => "exact_C1r",
            ClassTag::ExactQAr => "exact_QAr",
        }
    }
}

/// Membership verdict for one class with the data that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassCertificate {
    pub tag: ClassTag,
    pub member: bool,
    /// `(‖T‖, ‖rT⁻¹‖)` for the `C(1,r)` family, `(‖rT‖, ‖rT⁻¹‖)` for `QA(r)`.
    pub witness_norms: (f64, f64),
    /// Smallest eigenvalue of the class defect.
    pub defect_min_eig: f64,
    /// Operator norm of the class defect (meaningful for the exact classes).
    pub defect_residual_norm: f64,
    /// Largest distance from an eigenvalue of `T*T` to the allowed two-point
    /// set (exact classes only; zero otherwise).
    pub spectral_residual: f64,
    /// Whether the cross-check route reached the same verdict.
    pub routes_agree: bool,
}

/// All four certificates for one operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub c1r: ClassCertificate,
    pub qar: ClassCertificate,
    pub exact_c1r: ClassCertificate,
    pub exact_qar: ClassCertificate,
}

impl Classification {
    pub fn get(&self, tag: ClassTag) -> &ClassCertificate {
        match tag {
            ClassTag::C1r => &self.c1r,
            ClassTag::QAr => &self.qar,
            ClassTag::ExactC1r => &self.exact_c1r,
            ClassTag::ExactQAr => &self.exact_qar,
        }
    }

    pub fn certificates(&self) -> [ClassCertificate; 4] {
        [self.c1r, self.qar, self.exact_c1r, self.exact_qar]
    }
}

/// Tests an operator against all four classes.
///
/// Norm classes use the norm route as the verdict and the defect's smallest
/// eigenvalue as cross-check. Exact classes use the spectrum of `T*T`
/// (`{r², 1}` resp. `{r², r⁻²}`) as the verdict and the defect norm as
/// cross-check.
pub fn classify(t: &ComplexMatrix, r: f64, tol: &Tolerances) -> Result<Classification> {
    validate_radius(r, tol)?;
    let inv = t.inverse(tol)?;
    let norm_t = operator_norm(t);
    let norm_rinv = r * operator_norm(&inv);
    let slack = 1.0 + tol.eq_tol();

    let d_c = defect_c1r(t, r, tol)?;
    let d_q = defect_qar(t, r, tol)?;
    let eig_c = hermitian_eig(&d_c, tol)?;
    let eig_q = hermitian_eig(&d_q, tol)?;
    let min_c = eig_c.eigenvalues[0];
    let min_q = eig_q.eigenvalues[0];
    let norm_dc = eig_c.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let norm_dq = eig_q.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));

    let c1r_member = norm_t <= slack && norm_rinv <= slack;
    let c1r_defect = min_c >= -tol.psd_tol();
    let c1r = ClassCertificate {
        tag: ClassTag::C1r,
        member: c1r_member,
        witness_norms: (norm_t, norm_rinv),
        defect_min_eig: min_c,
        defect_residual_norm: norm_dc,
        spectral_residual: 0.0,
        routes_agree: c1r_member == c1r_defect,
    };

    let qar_member = r * norm_t <= slack && norm_rinv <= slack;
    let qar_defect = min_q >= -tol.psd_tol();
    let qar = ClassCertificate {
        tag: ClassTag::QAr,
        member: qar_member,
        witness_norms: (r * norm_t, norm_rinv),
        defect_min_eig: min_q,
        defect_residual_norm: norm_dq,
        spectral_residual: 0.0,
        routes_agree: qar_member == qar_defect,
    };

    let gram = hermitian_eig(&(&t.adjoint() * t), tol)?;
    let r2 = r * r;
    let c_spec = two_point_residual(&gram.eigenvalues, r2, 1.0);
    let q_spec = two_point_residual(&gram.eigenvalues, r2, 1.0 / r2);
    let exact_c_member = c_spec <= tol.eq_tol();
    let exact_q_member = q_spec <= tol.eq_tol();
    let exact_c1r = ClassCertificate {
        tag: ClassTag::ExactC1r,
        member: exact_c_member,
        witness_norms: c1r.witness_norms,
        defect_min_eig: min_c,
        defect_residual_norm: norm_dc,
        spectral_residual: c_spec,
        routes_agree: exact_c_member == (norm_dc <= tol.eq_tol() * (1.0 + 1.0 / r2)),
    };
    let exact_qar = ClassCertificate {
        tag: ClassTag::ExactQAr,
        member: exact_q_member,
        witness_norms: qar.witness_norms,
        defect_min_eig: min_q,
        defect_residual_norm: norm_dq,
        spectral_residual: q_spec,
        routes_agree: exact_q_member == (norm_dq <= tol.eq_tol() * (1.0 / r2 + 1.0 / (r2 * r2))),
    };
    Ok(Classification { c1r, qar, exact_c1r, exact_qar })
}

/// Largest relative distance from a value to the nearer of `a`, `b`.
fn two_point_residual(values: &[f64], a: f64, b: f64) -> f64 {
    values.iter().fold(0.0f64, |m, &x| {
        let da = (x - a).abs() / a.max(1.0);
        let db = (x - b).abs() / b.max(1.0);
        m.max(da.min(db))
    })
}

/// `(r^{-1/2} T, √r)`: maps `C(1,r)` onto `QA(√r)`.
pub fn scale_c1r_to_qa(t: &ComplexMatrix, r: f64, tol: &Tolerances) -> Result<(ComplexMatrix, f64)> {
    validate_radius(r, tol)?;
    require_invertible(t, tol)?;
    let s = r.sqrt();
    Ok((t.scale_real(1.0 / s), s))
}

/// `(r T, r²)`: maps `QA(r)` onto `C(1,r²)`.
pub fn qa_to_c1r(t: &ComplexMatrix, r: f64, tol: &Tolerances) -> Result<(ComplexMatrix, f64)> {
    validate_radius(r, tol)?;
    require_invertible(t, tol)?;
    Ok((t.scale_real(r), r * r))
}

/// Outcome of the doubly commuting test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleCommutation {
    pub holds: bool,
    pub max_residual: f64,
}

/// Largest of `‖T_iT_j - T_jT_i‖` and `‖T_iT_j* - T_j*T_i‖` over `i ≠ j`.
pub fn double_commutation_residual(ops: &[ComplexMatrix]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..ops.len() {
        for j in (i + 1)..ops.len() {
            let a = &ops[i];
            let b = &ops[j];
            let comm = operator_norm(&a.commutator(b));
            let bs = b.adjoint();
            let star = operator_norm(&a.commutator(&bs));
            worst = worst.max(comm).max(star);
        }
    }
    worst
}

/// Doubly commuting test: holds iff the residual is at most
/// `eq_tol * max ‖T_i‖²`.
pub fn is_doubly_commuting(tuple: &OperatorTuple, tol: &Tolerances) -> DoubleCommutation {
    doubly_commuting_ops(tuple.ops(), tol)
}

pub(crate) fn doubly_commuting_ops(ops: &[ComplexMatrix], tol: &Tolerances) -> DoubleCommutation {
    let max_residual = double_commutation_residual(ops);
    let scale = ops.iter().map(operator_norm).fold(0.0f64, f64::max);
    DoubleCommutation { holds: max_residual <= tol.eq_tol() * (scale * scale).max(1.0), max_residual }
}
