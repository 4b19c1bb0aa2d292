//! Input parsing and JSON output.

use std::io::{Read, Write};
use std::path::Path;

use mamrealize_core::{
    build_mammillary, build_pkpd, MammillaryParams, PkPdParams, StateSpaceModel, TransferFunction,
};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

fn read_text(path: &Path) -> Result<String, CliError> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError(format!("cannot read stdin: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(path)
        .map_err(|e| CliError(format!("cannot read {}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError(format!("{}: {e}", path.display())))
}

pub fn read_transfer_function(path: &Path) -> Result<TransferFunction, CliError> {
    parse(path, &read_text(path)?)
}

/// Parameters as written by `realize` / `pkpd` and read by `forward` / `simulate`.
#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelOut {
    Mammillary(MammillaryParams),
    Pkpd(PkPdParams),
}

/// Mammillary input may list the peripheral pairs in any order.
#[derive(Deserialize)]
struct MammillaryFile {
    n: Option<usize>,
    k10: f64,
    k_to_center: Vec<f64>,
    k_from_center: Vec<f64>,
}

#[derive(Deserialize)]
struct StateSpaceFile {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
}

pub struct LoadedModel {
    pub model: StateSpaceModel,
    pub permutation: Option<Vec<usize>>,
    pub warnings: Vec<String>,
}

fn infer_kind(v: &Value) -> Option<&'static str> {
    if v.get("k_to_center").is_some() {
        Some("mammillary")
    } else if v.get("ke0").is_some() {
        Some("pkpd")
    } else if v.get("a").is_some() {
        Some("state_space")
    } else {
        None
    }
}

pub fn read_model(path: &Path) -> Result<LoadedModel, CliError> {
    let mut value: Value = parse(path, &read_text(path)?)?;
    // accept the full output of `realize` / `pkpd --ref-ke0`
    if let Some(inner) = value.get_mut("params").map(Value::take) {
        value = inner;
    }
    let kind = match value.get("kind") {
        Some(Value::String(k)) => k.clone(),
        Some(other) => return Err(CliError(format!("`kind` must be a string, got {other}"))),
        None => infer_kind(&value)
            .ok_or_else(|| CliError(format!("{}: missing `kind`", path.display())))?
            .to_string(),
    };
    let ctx = |e: serde_json::Error| CliError(format!("{}: {e}", path.display()));
    let mut warnings = Vec::new();
    let mut permutation = None;
    let model = match kind.as_str() {
        "mammillary" => {
            let f: MammillaryFile = serde_json::from_value(value).map_err(ctx)?;
            let (p, perm) =
                MammillaryParams::from_unordered(f.k10, f.k_to_center, f.k_from_center)?;
            if let Some(n) = f.n {
                if n != p.n() {
                    return Err(CliError(format!(
                        "declared n = {n} does not match {} compartments",
                        p.n()
                    )));
                }
            }
            if perm.iter().enumerate().any(|(i, &j)| i != j) {
                warnings.push(format!(
                    "peripheral compartments reordered by increasing k_to_center: {perm:?}"
                ));
                permutation = Some(perm);
            }
            build_mammillary(&p)
        }
        "pkpd" => build_pkpd(&serde_json::from_value::<PkPdParams>(value).map_err(ctx)?),
        "state_space" => {
            let f: StateSpaceFile = serde_json::from_value(value).map_err(ctx)?;
            let n = f.a.len();
            if f.a.iter().any(|row| row.len() != n) {
                return Err(CliError("state-space `a` must be square".into()));
            }
            let a = DMatrix::from_row_iterator(n, n, f.a.into_iter().flatten());
            StateSpaceModel::new(a, DVector::from_vec(f.b), DVector::from_vec(f.c))?
        }
        other => {
            return Err(CliError(format!(
                "unknown kind `{other}` (expected mammillary, pkpd or state_space)"
            )))
        }
    };
    Ok(LoadedModel {
        model,
        permutation,
        warnings,
    })
}

/// Every `null` in our output can only come from a non-finite float.
fn first_null(v: &Value, path: &mut String) -> bool {
    match v {
        Value::Null => true,
        Value::Array(items) => items.iter().enumerate().any(|(i, x)| {
            let len = path.len();
            path.push_str(&format!("[{i}]"));
            let found = first_null(x, path);
            if !found {
                path.truncate(len);
            }
            found
        }),
        Value::Object(map) => map.iter().any(|(k, x)| {
            let len = path.len();
            path.push('.');
            path.push_str(k);
            let found = first_null(x, path);
            if !found {
                path.truncate(len);
            }
            found
        }),
        _ => false,
    }
}

pub fn write_output<T: Serialize>(value: &T) -> Result<(), CliError> {
    let v = serde_json::to_value(value)?;
    let mut path = String::new();
    if first_null(&v, &mut path) {
        return Err(CliError(format!("non-finite value in output at `{path}`")));
    }
    let mut text = serde_json::to_string_pretty(&v)?;
    text.push('\n');
    write_stdout(&text)
}

/// A closed downstream pipe is not an error.
pub fn write_stdout(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(CliError(format!("cannot write stdout: {e}")))
        }
        _ => Ok(()),
    }
}
