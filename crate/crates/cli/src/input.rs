//! JSON input documents.
//!
//! ```json
//! {"kind": "bell_diagonal", "lambdas": [0.7, 0.1, 0.1, 0.1]}
//! {"kind": "density_matrix", "rho": [[[0.5, 0], 0, 0, [0.5, 0]], ...]}
//! {"kind": "kraus", "operators": [[[1, 0], [0, 1]]]}
//! {"kind": "choi", "choi": [[...], ...]}
//! ```
//!
//! Matrices are row-major arrays of rows. A complex entry is `[re, im]`; a
//! bare number is read as real.

use std::path::Path;

use serde_json::Value;
use simcap::channel::QubitChannel;
use simcap::qlin::{CMatrix, C64};
use simcap::states::{BellDiagonal, TwoQubitState};

use crate::error::CliError;

#[derive(Debug, Clone)]
pub enum Input {
    DensityMatrix(TwoQubitState),
    BellDiagonal { raw: [f64; 4], bd: BellDiagonal },
    Channel { kind: &'static str, channel: QubitChannel },
}

impl Input {
    pub fn kind(&self) -> &'static str {
        match self {
            Input::DensityMatrix(_) => "density_matrix",
            Input::BellDiagonal { .. } => "bell_diagonal",
            Input::Channel { kind, .. } => kind,
        }
    }
}

fn bad(field: &str, what: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("field `{field}`: {what}"))
}

fn number(v: &Value, field: &str) -> Result<f64, CliError> {
    let x = v
        .as_f64()
        .ok_or_else(|| bad(field, format!("expected a number, found {v}")))?;
    if !x.is_finite() {
        return Err(bad(field, "not finite"));
    }
    Ok(x)
}

fn complex(v: &Value, field: &str) -> Result<C64, CliError> {
    match v {
        Value::Array(pair) if pair.len() == 2 => Ok(C64::new(
            number(&pair[0], &format!("{field}[0]"))?,
            number(&pair[1], &format!("{field}[1]"))?,
        )),
        Value::Array(other) => Err(bad(
            field,
            format!("expected a [re, im] pair, found {} elements", other.len()),
        )),
        _ => Ok(C64::new(number(v, field)?, 0.0)),
    }
}

fn matrix(v: &Value, field: &str, dim: usize) -> Result<CMatrix, CliError> {
    let rows = v
        .as_array()
        .ok_or_else(|| bad(field, "expected an array of rows"))?;
    if rows.len() != dim {
        return Err(bad(field, format!("expected {dim} rows, found {}", rows.len())));
    }
    let mut m = CMatrix::zeros(dim, dim);
    for (i, row) in rows.iter().enumerate() {
        let name = format!("{field}[{i}]");
        let row = row
            .as_array()
            .ok_or_else(|| bad(&name, "expected a row array"))?;
        if row.len() != dim {
            return Err(bad(&name, format!("expected {dim} entries, found {}", row.len())));
        }
        for (j, x) in row.iter().enumerate() {
            m[(i, j)] = complex(x, &format!("{field}[{i}][{j}]"))?;
        }
    }
    Ok(m)
}

fn field<'a>(doc: &'a Value, name: &str) -> Result<&'a Value, CliError> {
    doc.get(name)
        .ok_or_else(|| bad(name, "missing"))
}

pub fn parse_input(text: &str) -> Result<Input, CliError> {
    let doc: Value =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("not valid JSON: {e}")))?;
    let kind = field(&doc, "kind")?
        .as_str()
        .ok_or_else(|| bad("kind", "expected a string"))?;
    match kind {
        "density_matrix" => {
            let rho = matrix(field(&doc, "rho")?, "rho", 4)?;
            let s = TwoQubitState::new(rho).map_err(|e| bad("rho", e))?;
            Ok(Input::DensityMatrix(s))
        }
        "bell_diagonal" => {
            let arr = field(&doc, "lambdas")?
                .as_array()
                .ok_or_else(|| bad("lambdas", "expected an array of four numbers"))?;
            if arr.len() != 4 {
                return Err(bad("lambdas", format!("expected 4 weights, found {}", arr.len())));
            }
            let mut raw = [0.0; 4];
            for (i, v) in arr.iter().enumerate() {
                raw[i] = number(v, &format!("lambdas[{i}]"))?;
            }
            let bd = BellDiagonal::new(raw).map_err(|e| bad("lambdas", e))?;
            Ok(Input::BellDiagonal { raw, bd })
        }
        "kraus" => {
            let ops = field(&doc, "operators")?
                .as_array()
                .ok_or_else(|| bad("operators", "expected an array of 2x2 matrices"))?;
            let kraus = ops
                .iter()
                .enumerate()
                .map(|(k, m)| matrix(m, &format!("operators[{k}]"), 2))
                .collect::<Result<Vec<_>, _>>()?;
            let channel = QubitChannel::from_kraus(kraus).map_err(|e| bad("operators", e))?;
            Ok(Input::Channel {
                kind: "kraus",
                channel,
            })
        }
        "choi" => {
            let choi = matrix(field(&doc, "choi")?, "choi", 4)?;
            let channel = QubitChannel::from_choi(choi).map_err(|e| bad("choi", e))?;
            Ok(Input::Channel {
                kind: "choi",
                channel,
            })
        }
        other => Err(bad(
            "kind",
            format!("unknown kind `{other}` (expected density_matrix, bell_diagonal, kraus or choi)"),
        )),
    }
}

pub fn read_input(path: &Path) -> Result<Input, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_input(&text)
}
