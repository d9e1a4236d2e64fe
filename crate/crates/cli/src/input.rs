//! Matrix files.
//!
//! Two JSON layouts are accepted:
//!
//! ```text
//! {"m": 2, "beta": 2, "planes": [[[2, 0.5], [0.5, 1]], [[0, 0.1], [-0.1, 0]]]}
//! {"spectrum": [2.0, 0.5], "logdet": 0.0}
//! ```
//!
//! Rectangular matrices (the sampler mean) use `"rows"` and `"cols"` in
//! place of `"m"`. A spectrum file stands for the diagonal matrix with those
//! entries; all spectrum files of one command share that diagonal basis.

use std::path::Path;

use nalgebra::DMatrix;
use rnda_core::{AlgebraDim, AlgebraMatrix, HermitianMatrix};
use serde_json::{Map, Value};

use crate::CliError;

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub enum Operand {
    Matrix(HermitianMatrix),
    Diagonal(Vec<f64>),
}

impl Operand {
    pub fn m(&self) -> usize {
        match self {
            Operand::Matrix(a) => a.m(),
            Operand::Diagonal(d) => d.len(),
        }
    }

    /// The operand as a matrix; spectra become diagonal matrices.
    pub fn to_matrix(&self, beta: AlgebraDim) -> HermitianMatrix {
        match self {
            Operand::Matrix(a) => a.clone(),
            Operand::Diagonal(d) => HermitianMatrix::diagonal(d, beta),
        }
    }
}

fn invalid(path: &Path, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{}: {msg}", path.display()))
}

fn read_object(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(path, e))?;
    match serde_json::from_str(&text).map_err(|e| invalid(path, e))? {
        Value::Object(map) => Ok(map),
        _ => Err(invalid(path, "expected a JSON object")),
    }
}

fn field_usize(path: &Path, map: &Map<String, Value>, key: &str) -> Result<usize, CliError> {
    map.get(key)
        .and_then(Value::as_u64)
        .map(|v| v as usize)
        .ok_or_else(|| invalid(path, format!("field `{key}` must be a non-negative integer")))
}

fn field_reals(path: &Path, value: &Value, key: &str) -> Result<Vec<f64>, CliError> {
    value
        .as_array()
        .and_then(|a| a.iter().map(Value::as_f64).collect::<Option<Vec<_>>>())
        .ok_or_else(|| invalid(path, format!("field `{key}` must be an array of numbers")))
}

fn read_planes(
    path: &Path,
    map: &Map<String, Value>,
    rows: usize,
    cols: usize,
) -> Result<(AlgebraDim, Vec<DMatrix<f64>>), CliError> {
    let beta_raw =
        map.get("beta").and_then(Value::as_u64).ok_or_else(|| invalid(path, "field `beta` must be 1, 2, 4 or 8"))?;
    let beta = AlgebraDim::from_beta(beta_raw as u32).map_err(|e| invalid(path, format!("field `beta`: {e}")))?;
    let planes = map
        .get("planes")
        .and_then(Value::as_array)
        .ok_or_else(|| invalid(path, "field `planes` must be an array of matrices"))?;
    if planes.len() != beta.beta() as usize {
        return Err(invalid(
            path,
            format!("field `planes` has {} entries but beta = {} needs {}", planes.len(), beta, beta.beta()),
        ));
    }
    let mut out = Vec::with_capacity(planes.len());
    for (t, plane) in planes.iter().enumerate() {
        let grid = plane
            .as_array()
            .filter(|r| r.len() == rows)
            .ok_or_else(|| invalid(path, format!("field `planes[{t}]` must have {rows} rows")))?;
        let mut data = Vec::with_capacity(rows * cols);
        for (i, row) in grid.iter().enumerate() {
            let row = field_reals(path, row, &format!("planes[{t}][{i}]"))?;
            if row.len() != cols {
                return Err(invalid(path, format!("field `planes[{t}][{i}]` must have {cols} entries")));
            }
            data.extend(row);
        }
        out.push(DMatrix::from_row_slice(rows, cols, &data));
    }
    Ok((beta, out))
}

fn check_beta(path: &Path, found: AlgebraDim, expected: AlgebraDim) -> Result<(), CliError> {
    if found != expected {
        return Err(invalid(path, format!("field `beta` is {found} but --beta is {expected}")));
    }
    Ok(())
}

/// A square self-adjoint matrix or a spectrum.
pub fn read_operand(path: &Path, beta: AlgebraDim) -> Result<Operand, CliError> {
    let map = read_object(path)?;
    if map.contains_key("spectrum") {
        let spectrum = field_reals(path, &map["spectrum"], "spectrum")?;
        if spectrum.is_empty() {
            return Err(invalid(path, "field `spectrum` is empty"));
        }
        if let Some(v) = map.get("logdet") {
            let logdet = v.as_f64().ok_or_else(|| invalid(path, "field `logdet` must be a number"))?;
            let implied: f64 = spectrum.iter().map(|v| v.ln()).sum();
            if !(((logdet - implied).abs()) <= 1e-9 * logdet.abs().max(1.0)) {
                return Err(invalid(
                    path,
                    format!("field `logdet` = {logdet} disagrees with the spectrum ({implied})"),
                ));
            }
        }
        return Ok(Operand::Diagonal(spectrum));
    }
    if !map.contains_key("planes") {
        return Err(invalid(path, "expected field `planes` or field `spectrum`"));
    }
    let m = field_usize(path, &map, "m")?;
    if m == 0 {
        return Err(invalid(path, "field `m` must be positive"));
    }
    let (found, planes) = read_planes(path, &map, m, m)?;
    check_beta(path, found, beta)?;
    let scale = planes.iter().fold(1.0f64, |a, p| a.max(p.amax()));
    for (t, p) in planes.iter().enumerate() {
        let defect = if t == 0 { (p - p.transpose()).amax() } else { (p + p.transpose()).amax() };
        if defect > SYMMETRY_TOL * scale {
            let kind = if t == 0 { "symmetric" } else { "antisymmetric" };
            return Err(invalid(path, format!("field `planes[{t}]` must be {kind} (defect {defect:e})")));
        }
    }
    HermitianMatrix::new(found, planes).map(Operand::Matrix).map_err(|e| invalid(path, e))
}

/// A rectangular `rows × cols` matrix over the algebra.
pub fn read_rectangular(path: &Path, beta: AlgebraDim) -> Result<AlgebraMatrix, CliError> {
    let map = read_object(path)?;
    let (rows, cols) = if map.contains_key("m") {
        let m = field_usize(path, &map, "m")?;
        (m, m)
    } else {
        (field_usize(path, &map, "rows")?, field_usize(path, &map, "cols")?)
    };
    let (found, planes) = read_planes(path, &map, rows, cols)?;
    check_beta(path, found, beta)?;
    AlgebraMatrix::from_planes(found, planes).map_err(|e| invalid(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    fn message(r: Result<Operand, CliError>) -> String {
        match r {
            Err(CliError::Validation(m)) => m,
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn complex_matrix_loads() {
        let f = file(r#"{"m": 2, "beta": 2, "planes": [[[2, 0.5], [0.5, 1]], [[0, 0.25], [-0.25, 0]]]}"#);
        match read_operand(f.path(), AlgebraDim::Complex).unwrap() {
            Operand::Matrix(a) => assert_eq!(a.planes()[1][(0, 1)], 0.25),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_plane_count_names_field() {
        let f = file(r#"{"m": 1, "beta": 2, "planes": [[[1]]]}"#);
        assert!(message(read_operand(f.path(), AlgebraDim::Complex)).contains("`planes`"));
    }

    #[test]
    fn asymmetric_plane_rejected() {
        let f = file(r#"{"m": 2, "beta": 1, "planes": [[[1, 0.2], [0.3, 1]]]}"#);
        assert!(message(read_operand(f.path(), AlgebraDim::Real)).contains("symmetric"));
    }

    #[test]
    fn spectrum_logdet_checked() {
        let ok = file(r#"{"spectrum": [2, 0.5], "logdet": 0}"#);
        assert!(matches!(read_operand(ok.path(), AlgebraDim::Octonion), Ok(Operand::Diagonal(_))));
        let bad = file(r#"{"spectrum": [2, 0.5], "logdet": 1}"#);
        assert!(message(read_operand(bad.path(), AlgebraDim::Octonion)).contains("`logdet`"));
    }

    #[test]
    fn beta_mismatch_rejected() {
        let f = file(r#"{"m": 1, "beta": 1, "planes": [[[1]]]}"#);
        assert!(message(read_operand(f.path(), AlgebraDim::Complex)).contains("`beta`"));
    }
}
