//! Machine-readable reports, tolerance configuration and atomic output.

use std::io::Write;
use std::path::Path;

use annulus_core::{Basis, ComplexMatrix, Tolerances};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const ENV_EQ: &str = "ANNULUS_TOL_EQ";
pub const ENV_PSD: &str = "ANNULUS_TOL_PSD";
pub const ENV_KER: &str = "ANNULUS_TOL_KER";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Ambiguous,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct ToleranceEcho {
    pub eq_tol: f64,
    pub psd_tol: f64,
    pub kernel_tol: f64,
}

impl From<&Tolerances> for ToleranceEcho {
    fn from(t: &Tolerances) -> Self {
        Self { eq_tol: t.eq_tol(), psd_tol: t.psd_tol(), kernel_tol: t.kernel_tol() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub input_digest: String,
    pub tolerances: ToleranceEcho,
    pub results: Value,
    pub status: Status,
}

impl Report {
    pub fn to_canonical_string(&self) -> String {
        canonical_json(self)
    }
}

/// Pretty JSON with keys in sorted order and a trailing newline.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("report values serialize");
    let mut s = serde_json::to_string_pretty(&v).expect("JSON values print");
    s.push('\n');
    s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Defaults overridden by `ANNULUS_TOL_EQ`, `ANNULUS_TOL_PSD` and
/// `ANNULUS_TOL_KER`.
pub fn tolerances_from_env() -> Result<Tolerances, CliError> {
    tolerances_from(|k| std::env::var(k).ok())
}

pub fn tolerances_from(lookup: impl Fn(&str) -> Option<String>) -> Result<Tolerances, CliError> {
    let d = Tolerances::default();
    let read = |key: &str, default: f64| -> Result<f64, CliError> {
        match lookup(key) {
            None => Ok(default),
            Some(s) => s.trim().parse::<f64>().map_err(|_| CliError::Input(format!("{key}: cannot parse {s:?}"))),
        }
    };
    let eq = read(ENV_EQ, d.eq_tol())?;
    let psd = read(ENV_PSD, d.psd_tol())?;
    let ker = read(ENV_KER, d.kernel_tol())?;
    Ok(Tolerances::new(eq, psd, ker)?)
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(())
}

pub fn matrix_json(m: &ComplexMatrix) -> Value {
    let data: Vec<[f64; 2]> = m.to_row_major().iter().map(|z| [z.re, z.im]).collect();
    json!({ "dim": m.dim(), "data": data })
}

/// Basis columns as a row-major `rows x cols` array.
pub fn basis_json(b: &Basis) -> Value {
    let m = b.as_dmatrix();
    let mut data = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            data.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    json!({ "rows": m.nrows(), "cols": m.ncols(), "data": data })
}
