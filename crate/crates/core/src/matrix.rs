//! Dense complex linear algebra shared by every other module.
//!
//! [`ComplexMatrix`] is a square, finite complex matrix. Factorizations are
//! delegated to `nalgebra`; this module adds the ordering, phase and
//! tolerance conventions the rest of the crate relies on.

use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::jacobi::{self, Svd};

const SOLVER_MAX_ITER: usize = 100_000;
/// Components below this modulus are skipped when fixing eigenvector phases.
const PHASE_FLOOR: f64 = 1e-10;

/// Numerical thresholds used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    eq_tol: f64,
    psd_tol: f64,
    kernel_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { eq_tol: 1e-10, psd_tol: 1e-10, kernel_tol: 1e-8 }
    }
}

impl Tolerances {
    pub fn new(eq_tol: f64, psd_tol: f64, kernel_tol: f64) -> Result<Self> {
        for t in [eq_tol, psd_tol, kernel_tol] {
            if !(0.0..1.0).contains(&t) {
                return Err(Error::InvalidTolerance(t));
            }
        }
        Ok(Self { eq_tol, psd_tol, kernel_tol })
    }

    /// Entrywise / operator-norm equality threshold.
    pub fn eq_tol(&self) -> f64 {
        self.eq_tol
    }

    /// Allowed negativity of the smallest eigenvalue in positivity tests.
    pub fn psd_tol(&self) -> f64 {
        self.psd_tol
    }

    /// Relative singular-value cutoff for kernels and invertibility.
    pub fn kernel_tol(&self) -> f64 {
        self.kernel_tol
    }
}

/// A square complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{:?}", self.inner)
    }
}

impl ComplexMatrix {
    pub fn identity(dim: usize) -> Self {
        Self { inner: DMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { inner: DMatrix::zeros(dim, dim) }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self { inner: DMatrix::from_fn(dim, dim, f) }
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        Self { inner: DMatrix::from_diagonal(&DVector::from_column_slice(diag)) }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { Complex64::new(diag[i], 0.0) } else { Complex64::zero() })
    }

    /// Builds a matrix from row-major data of length `dim * dim`.
    pub fn from_row_major(dim: usize, data: &[Complex64]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("matrix dimension must be positive"));
        }
        if data.len() != dim * dim {
            return Err(Error::BadLength { expected: dim * dim, found: data.len() });
        }
        Self::from_dmatrix(DMatrix::from_row_slice(dim, dim, data))
    }

    pub fn from_dmatrix(inner: DMatrix<Complex64>) -> Result<Self> {
        if inner.nrows() != inner.ncols() {
            return Err(Error::NotSquare { rows: inner.nrows(), cols: inner.ncols() });
        }
        for j in 0..inner.ncols() {
            for i in 0..inner.nrows() {
                let z = inner[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self { inner })
    }

    pub(crate) fn from_dmatrix_unchecked(inner: DMatrix<Complex64>) -> Self {
        debug_assert_eq!(inner.nrows(), inner.ncols());
        Self { inner }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.inner[(row, col)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.inner
    }

    pub fn to_row_major(&self) -> Vec<Complex64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self { inner: self.inner.adjoint() }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { inner: &self.inner * c }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self { inner: self.inner.kronecker(&other.inner) }
    }

    pub fn trace(&self) -> Complex64 {
        self.inner.trace()
    }

    /// `(A + A*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let sum = &self.inner + self.inner.adjoint();
        Self { inner: sum * Complex64::new(0.5, 0.0) }
    }

    /// Frobenius norm of `A - A*`.
    pub fn hermitian_residual(&self) -> f64 {
        (&self.inner - self.inner.adjoint()).norm()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `AB - BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        Self { inner: &self.inner * &other.inner - &other.inner * &self.inner }
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Vec<f64> {
        singular_values_of(&self.inner)
    }

    pub fn smallest_singular_value(&self) -> f64 {
        self.singular_values().last().copied().unwrap_or(0.0)
    }

    /// Inverse through the SVD; fails when the smallest singular value is at
    /// or below `kernel_tol`.
    pub fn inverse(&self, tol: &Tolerances) -> Result<Self> {
        let svd = svd_of(&self.inner)?;
        let smin = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
        if smin.is_nan() || smin <= tol.kernel_tol() {
            return Err(Error::Singular { smallest_singular_value: smin });
        }
        let u = &svd.u;
        let mut scaled = svd.v.clone();
        for (k, s) in svd.singular_values.iter().enumerate() {
            scale_column(&mut scaled, k, 1.0 / s);
        }
        Ok(Self { inner: scaled * u.adjoint() })
    }

    /// Integer power; negative exponents go through [`ComplexMatrix::inverse`].
    pub fn powi(&self, n: i32, tol: &Tolerances) -> Result<Self> {
        let base = if n < 0 { self.inverse(tol)? } else { self.clone() };
        Ok(base.pow_unsigned(n.unsigned_abs()))
    }

    pub(crate) fn pow_unsigned(&self, mut e: u32) -> Self {
        let mut acc = Self::identity(self.dim());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// `‖A*A - I‖` in operator norm.
    pub fn unitarity_residual(&self) -> f64 {
        let g = &self.adjoint() * self;
        operator_norm(&(&g - &Self::identity(self.dim())))
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl<'a, 'b> $trait<&'b ComplexMatrix> for &'a ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &'b ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix { inner: &self.inner $op &rhs.inner }
            }
        }
        impl $trait<ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix { inner: self.inner $op rhs.inner }
            }
        }
        impl<'b> $trait<&'b ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &'b ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix { inner: self.inner $op &rhs.inner }
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Neg for ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix { inner: -self.inner }
    }
}

/// An orthonormal family of column vectors spanning a subspace of `C^n`.
///
/// The family may be empty (`rank() == 0`), representing the trivial
/// subspace.
#[derive(Clone, PartialEq)]
pub struct Basis {
    inner: DMatrix<Complex64>,
}

impl fmt::Debug for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Basis({}x{}){:?}", self.inner.nrows(), self.inner.ncols(), self.inner)
    }
}

impl Basis {
    pub fn empty(ambient_dim: usize) -> Self {
        Self { inner: DMatrix::zeros(ambient_dim, 0) }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self { inner: DMatrix::identity(ambient_dim, ambient_dim) }
    }

    /// Wraps columns the caller guarantees to be orthonormal.
    pub(crate) fn from_orthonormal(inner: DMatrix<Complex64>) -> Self {
        Self { inner }
    }

    /// Orthonormalizes arbitrary columns, dropping directions whose singular
    /// value falls below `cutoff`.
    pub fn span_of(columns: &DMatrix<Complex64>, cutoff: f64) -> Result<Self> {
        let n = columns.nrows();
        if columns.ncols() == 0 || n == 0 {
            return Ok(Self::empty(n));
        }
        let svd = svd_of(columns)?;
        let u = &svd.u;
        let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&k| svd.singular_values[k] > cutoff).collect();
        let mut out = DMatrix::zeros(n, keep.len());
        for (c, &k) in keep.iter().enumerate() {
            out.set_column(c, &u.column(k));
        }
        fix_column_phases(&mut out);
        Ok(Self { inner: out })
    }

    pub fn ambient_dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn rank(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.rank() == 0
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    pub fn column(&self, k: usize) -> Vec<Complex64> {
        self.inner.column(k).iter().copied().collect()
    }

    /// Orthogonal projector `B B*` onto the span.
    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::from_dmatrix_unchecked(&self.inner * self.inner.adjoint())
    }

    /// Compression `B* A B`. Returns `None` for the trivial subspace.
    pub fn compress(&self, a: &ComplexMatrix) -> Option<ComplexMatrix> {
        if self.is_empty() {
            return None;
        }
        Some(ComplexMatrix::from_dmatrix_unchecked(self.inner.adjoint() * a.as_dmatrix() * &self.inner))
    }

    /// Expresses a basis of a subspace of this span (given in this span's
    /// coordinates) in ambient coordinates.
    pub fn compose(&self, inner: &Basis) -> Result<Basis> {
        if inner.ambient_dim() != self.rank() {
            return Err(Error::DimensionMismatch { expected: self.rank(), found: inner.ambient_dim() });
        }
        Ok(Basis { inner: &self.inner * &inner.inner })
    }

    /// Orthonormal basis of the orthogonal complement.
    pub fn complement(&self) -> Result<Basis> {
        let n = self.ambient_dim();
        if self.is_empty() {
            return Ok(Self::full(n));
        }
        let (basis, _) = kernel_with_cutoff(&self.inner.adjoint(), 0.5)?;
        Ok(basis)
    }

    /// `‖B*B - I‖_F`.
    pub fn orthonormality_residual(&self) -> f64 {
        let k = self.rank();
        (self.inner.adjoint() * &self.inner - DMatrix::<Complex64>::identity(k, k)).norm()
    }
}

/// Eigen-decomposition of a Hermitian matrix with ascending eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianEig {
    pub eigenvalues: Vec<f64>,
    /// Unitary whose columns are the eigenvectors, in eigenvalue order.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEig {
    /// `Q diag(λ) Q*`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|l| l)
    }

    /// `Q diag(f(λ)) Q*`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let q = self.eigenvectors.as_dmatrix();
        let mut scaled = q.clone();
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            scale_column(&mut scaled, k, f(l));
        }
        ComplexMatrix::from_dmatrix_unchecked(scaled * q.adjoint())
    }
}

fn check_hermitian(a: &ComplexMatrix, tol: &Tolerances) -> Result<()> {
    let residual = a.hermitian_residual();
    if residual > tol.eq_tol() * a.frobenius_norm().max(1.0) {
        return Err(Error::NotHermitian { residual });
    }
    Ok(())
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// The input is symmetrized as `(A + A*)/2` before the solve. Eigenvalues are
/// ascending and each eigenvector has its first non-negligible component made
/// real and positive.
pub fn hermitian_eig(a: &ComplexMatrix, tol: &Tolerances) -> Result<HermitianEig> {
    check_hermitian(a, tol)?;
    let n = a.dim();
    let sym = a.hermitian_part();
    let eig = sym.inner.try_symmetric_eigen(f64::EPSILON, SOLVER_MAX_ITER).ok_or(Error::NoConvergence)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut q = DMatrix::zeros(n, n);
    let mut eigenvalues = Vec::with_capacity(n);
    for (c, &k) in order.iter().enumerate() {
        q.set_column(c, &eig.eigenvectors.column(k));
        eigenvalues.push(eig.eigenvalues[k]);
    }
    fix_column_phases(&mut q);
    Ok(HermitianEig { eigenvalues, eigenvectors: ComplexMatrix { inner: q } })
}

/// Square root of a positive semidefinite matrix; negative rounding
/// eigenvalues are clamped to zero.
pub fn psd_sqrt(a: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(a, tol)?;
    Ok(eig.reconstruct_with(|l| l.max(0.0).sqrt()).hermitian_part())
}

/// Polar factors `T = U D` of an invertible matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Polar {
    pub unitary: ComplexMatrix,
    /// `(T*T)^{1/2}`, Hermitian positive definite.
    pub positive: ComplexMatrix,
}

/// Polar decomposition through the SVD `T = W Σ V*`: `U = W V*`, `D = V Σ V*`.
pub fn polar_decompose(t: &ComplexMatrix, tol: &Tolerances) -> Result<Polar> {
    let svd = svd_of(&t.inner)?;
    let smin = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    if smin.is_nan() || smin <= tol.kernel_tol() {
        return Err(Error::Singular { smallest_singular_value: smin });
    }
    let w = &svd.u;
    let v = &svd.v;
    let v_t = v.adjoint();
    let mut v_sigma = v.clone();
    for (k, s) in svd.singular_values.iter().enumerate() {
        scale_column(&mut v_sigma, k, *s);
    }
    let positive = ComplexMatrix { inner: v_sigma * &v_t }.hermitian_part();
    let unitary = ComplexMatrix { inner: w * v_t };
    Ok(Polar { unitary, positive })
}

/// Orthonormal basis of the numerical kernel.
///
/// Keeps right singular vectors whose singular value is at most
/// `tol * σ_max` (or `tol` when `A = 0`).
pub fn null_space(a: &ComplexMatrix, tol: f64) -> Basis {
    let smax = singular_values_of(&a.inner).first().copied().unwrap_or(0.0);
    let reference = if smax > 0.0 { smax } else { 1.0 };
    kernel_with_cutoff(&a.inner, tol * reference).map(|(b, _)| b).unwrap_or_else(|_| Basis::empty(a.dim()))
}

/// Kernel of a possibly rectangular matrix: right singular vectors with
/// singular value `<= cutoff`. Also returns all singular values (descending,
/// padded with zeros for wide inputs).
pub(crate) fn kernel_with_cutoff(a: &DMatrix<Complex64>, cutoff: f64) -> Result<(Basis, Vec<f64>)> {
    let cols = a.ncols();
    if cols == 0 {
        return Ok((Basis::empty(0), Vec::new()));
    }
    let padded;
    let work = if a.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
        padded = p;
        &padded
    } else {
        a
    };
    let svd = svd_of(work)?;
    let sv = svd.singular_values;
    let keep: Vec<usize> = (0..sv.len()).filter(|&k| sv[k] <= cutoff).collect();
    let mut out = DMatrix::zeros(cols, keep.len());
    for (c, &k) in keep.iter().enumerate() {
        out.set_column(c, &svd.v.column(k));
    }
    fix_column_phases(&mut out);
    Ok((Basis { inner: out }, sv))
}

/// Largest singular value.
pub fn operator_norm(a: &ComplexMatrix) -> f64 {
    spectral_norm(&a.inner)
}

pub(crate) fn spectral_norm(a: &DMatrix<Complex64>) -> f64 {
    singular_values_of(a).first().copied().unwrap_or(0.0)
}

/// Outcome of a positivity test, always carrying the witness eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdWitness {
    pub holds: bool,
    pub min_eigenvalue: f64,
}

/// Tests `A ⪰ -psd_tol`. `A` must be Hermitian within `eq_tol`.
pub fn is_psd(a: &ComplexMatrix, tol: &Tolerances) -> Result<PsdWitness> {
    let eig = hermitian_eig(a, tol)?;
    let min_eigenvalue = eig.eigenvalues.first().copied().unwrap_or(0.0);
    Ok(PsdWitness { holds: min_eigenvalue >= -tol.psd_tol(), min_eigenvalue })
}

fn svd_of(a: &DMatrix<Complex64>) -> Result<Svd> {
    jacobi::svd(a).ok_or(Error::NoConvergence)
}

fn singular_values_of(a: &DMatrix<Complex64>) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    match svd_of(a) {
        Ok(svd) => svd.singular_values,
        Err(_) => {
            // Eigenvalues of A*A as a fallback.
            let g = a.adjoint() * a;
            let mut ev: Vec<f64> = g.symmetric_eigenvalues().iter().map(|l| l.max(0.0).sqrt()).collect();
            ev.sort_by(|x, y| y.total_cmp(x));
            ev
        }
    }
}

fn scale_column(m: &mut DMatrix<Complex64>, k: usize, s: f64) {
    for z in m.column_mut(k).iter_mut() {
        *z *= s;
    }
}

/// Rotates each column so its first non-negligible entry is real positive.
pub(crate) fn fix_column_phases(q: &mut DMatrix<Complex64>) {
    for mut col in q.column_iter_mut() {
        if let Some(z) = col.iter().copied().find(|z| z.norm() > PHASE_FLOOR) {
            let phase = z.conj() / z.norm();
            for x in col.iter_mut() {
                *x *= phase;
            }
        }
    }
}

/// Operator-norm distance between two matrices.
pub fn distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    operator_norm(&(a - b))
}
