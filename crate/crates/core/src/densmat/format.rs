//! The JSON matrix exchange format:
//! `{"dim": d, "entries": [[[re, im], ...], ...]}`, row-major.

use num_complex::Complex64;
use serde_json::{json, Value};

use super::{check_pow2, ComplexMatrix, DensError, DensResult};

pub fn matrix_to_value(m: &ComplexMatrix) -> Value {
    let entries: Vec<Value> = m
        .rows()
        .map(|row| Value::Array(row.iter().map(|z| json!([z.re, z.im])).collect()))
        .collect();
    json!({ "dim": m.dim(), "entries": entries })
}

fn bad(msg: impl Into<String>) -> DensError {
    DensError::Format(msg.into())
}

pub fn matrix_from_value(v: &Value) -> DensResult<ComplexMatrix> {
    let dim = v
        .get("dim")
        .and_then(Value::as_u64)
        .ok_or_else(|| bad("missing or non-integer \"dim\""))? as usize;
    check_pow2(dim)?;
    let rows = v
        .get("entries")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing \"entries\" array"))?;
    if rows.len() != dim {
        return Err(bad(format!("expected {dim} rows, found {}", rows.len())));
    }
    let mut out = Vec::with_capacity(dim);
    for (r, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| bad(format!("row {r} is not an array")))?;
        if row.len() != dim {
            return Err(bad(format!("row {r} has {} entries, expected {dim}", row.len())));
        }
        let mut parsed = Vec::with_capacity(dim);
        for (c, cell) in row.iter().enumerate() {
            let pair = cell.as_array().filter(|p| p.len() == 2);
            let z = pair
                .and_then(|p| Some(Complex64::new(p[0].as_f64()?, p[1].as_f64()?)))
                .ok_or_else(|| bad(format!("entry ({r},{c}) is not a [re, im] pair")))?;
            parsed.push(z);
        }
        out.push(parsed);
    }
    let m = ComplexMatrix::from_rows(out)?;
    if !m.is_finite() {
        return Err(DensError::NonFinite);
    }
    Ok(m)
}

pub fn matrix_from_json(text: &str) -> DensResult<ComplexMatrix> {
    let v: Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    matrix_from_value(&v)
}
