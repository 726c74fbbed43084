//! The tuple interchange format:
//! `{"operators": [{"data": [[re, im], ...], "dim": n}, ...], "r": r}`
//! with row-major data. Canonical output is a single line with sorted keys
//! and shortest round-trip floats, so `write(parse(file))` reproduces
//! canonical files byte for byte.

use annulus_core::classes::OperatorTuple;
use annulus_core::{Complex64, ComplexMatrix, Tolerances};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorEntry {
    pub data: Vec<[f64; 2]>,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleFile {
    pub operators: Vec<OperatorEntry>,
    pub r: f64,
}

impl TupleFile {
    pub fn from_tuple(tuple: &OperatorTuple) -> Self {
        Self::from_ops(tuple.r(), tuple.ops())
    }

    pub fn from_ops(r: f64, ops: &[ComplexMatrix]) -> Self {
        let operators = ops
            .iter()
            .map(|m| OperatorEntry { data: m.to_row_major().iter().map(|z| [z.re, z.im]).collect(), dim: m.dim() })
            .collect();
        Self { operators, r }
    }

    /// Parses and checks shape: non-empty, square, equal dimensions.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: TupleFile =
            serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed tuple file: {e}")))?;
        if file.operators.is_empty() {
            return Err(CliError::Input("operators: list is empty".into()));
        }
        let dim = file.operators[0].dim;
        for (k, op) in file.operators.iter().enumerate() {
            if op.dim == 0 {
                return Err(CliError::Input(format!("operators[{k}].dim: must be positive")));
            }
            if op.dim != dim {
                return Err(CliError::Input(format!(
                    "operators[{k}].dim: {} differs from operators[0].dim = {dim}",
                    op.dim
                )));
            }
            if op.data.len() != op.dim * op.dim {
                let at = op.data.len().min(op.dim * op.dim);
                return Err(CliError::Input(format!(
                    "operators[{k}].data: {} entries for a {}x{} matrix (first defect at index {at})",
                    op.data.len(),
                    op.dim,
                    op.dim
                )));
            }
            if let Some(i) = op.data.iter().position(|z| !(z[0].is_finite() && z[1].is_finite())) {
                return Err(CliError::Input(format!("operators[{k}].data[{i}]: non-finite entry")));
            }
        }
        Ok(file)
    }

    pub fn matrices(&self) -> Result<Vec<ComplexMatrix>, CliError> {
        self.operators
            .iter()
            .map(|op| {
                let data: Vec<Complex64> = op.data.iter().map(|z| Complex64::new(z[0], z[1])).collect();
                ComplexMatrix::from_row_major(op.dim, &data).map_err(CliError::from)
            })
            .collect()
    }

    pub fn to_tuple(&self, r: f64, tol: &Tolerances) -> Result<OperatorTuple, CliError> {
        Ok(OperatorTuple::new(r, self.matrices()?, tol)?)
    }

    /// Canonical text: one line, sorted keys, trailing newline.
    pub fn to_canonical_string(&self) -> String {
        let v = serde_json::to_value(self).expect("tuple files serialize");
        let mut s = v.to_string();
        s.push('\n');
        s
    }
}
