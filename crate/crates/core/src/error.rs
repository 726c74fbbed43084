use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Failures raised by the numerical routines.
///
/// Variants carry the measured quantity that triggered them so callers can
/// report how far an input was from satisfying a precondition.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix data has {found} entries, expected {expected}")]
    BadLength { expected: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("matrix is singular (smallest singular value {smallest_singular_value:e})")]
    Singular { smallest_singular_value: f64 },
    #[error("radius {0} outside the admissible open interval")]
    InvalidRadius(f64),
    #[error("invalid tolerance {0}; tolerances must lie in [0, 1)")]
    InvalidTolerance(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("tuple is empty")]
    EmptyTuple,
    #[error("tuple is not doubly commuting (residual {residual:e})")]
    NotDoublyCommuting { residual: f64 },
    #[error("operator {index} is not a member of {class} (witness {witness:e})")]
    NotMember { index: usize, class: &'static str, witness: f64 },
    #[error("eigenvalue clusters separated by {gap:e} are too close to resolve")]
    ClusterAmbiguity { gap: f64 },
    #[error("eigenvalue {eigenvalue} lies outside the closed annulus band")]
    SpectrumOutsideBand { eigenvalue: f64 },
    #[error("eigenvalue {eigenvalue} is not strictly inside (r, 1); snapping is required")]
    NeedsSnapping { eigenvalue: f64 },
    #[error("point ({re}, {im}) is an exceptional point of the symbol")]
    ExceptionalPoint { re: f64, im: f64 },
    #[error("point ({re}, {im}) lies outside the closed unit disk")]
    OutsideDisk { re: f64, im: f64 },
    #[error("point ({re}, {im}) is the pole of the Moebius map")]
    MoebiusPole { re: f64, im: f64 },
    #[error("node count {0} must be a power of two and at least 16")]
    InvalidNodeCount(usize),
    #[error("no admissible quadrature offset found")]
    NoAdmissibleOffset,
    #[error("power {0} exceeds the moment cap of 12")]
    PowerTooLarge(i32),
    #[error("word length {0} exceeds the cap of 6 factor pairs")]
    WordTooLong(usize),
    #[error("restriction to block {block} failed its {class} certificate (residual {residual:e})")]
    RestrictionFailed { block: usize, class: &'static str, residual: f64 },
    #[error("iterative solver did not converge")]
    NoConvergence,
}
