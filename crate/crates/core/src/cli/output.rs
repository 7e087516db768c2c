//! Text formats: branch CSV (write and read back), float formatting, JSON helpers.

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::ode::Tolerances;
use crate::radial::{BranchPoint, RadialSolution};

pub const BRANCH_HEADER: &str = "a,lambda,kappa,M,mu,sup_norm,boundary_flux";

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        serde_json::to_string(&x).expect("finite floats serialize")
    } else {
        format!("{x:?}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn branch_csv(points: &[BranchPoint]) -> String {
    let mut out = String::from(BRANCH_HEADER);
    out.push('\n');
    for p in points {
        let row = [
            fmt_f64(p.a),
            fmt_opt(p.lambda),
            fmt_opt(p.kappa),
            fmt_opt(p.mass),
            fmt_opt(p.mu),
            fmt_f64(p.sup_norm),
            fmt_f64(p.boundary_flux),
        ];
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn parse_field(s: &str, line: usize) -> Result<Option<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|e| Error::InvalidInput(format!("line {line}: bad number {s:?}: {e}")))
}

/// Parses the output of [`branch_csv`].
pub fn read_branch_csv(text: &str) -> Result<Vec<BranchPoint>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, h)) if h.trim() == BRANCH_HEADER => {}
        other => {
            return Err(Error::InvalidInput(format!(
                "expected header {BRANCH_HEADER:?}, found {:?}",
                other.map(|(_, l)| l)
            )))
        }
    }
    lines
        .map(|(i, l)| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 7 {
                return Err(Error::InvalidInput(format!("line {}: expected 7 fields, found {}", i + 1, f.len())));
            }
            let need = |k: usize| {
                parse_field(f[k], i + 1)?.ok_or_else(|| Error::InvalidInput(format!("line {}: field {k} is empty", i + 1)))
            };
            Ok(BranchPoint {
                a: need(0)?,
                lambda: parse_field(f[1], i + 1)?,
                kappa: parse_field(f[2], i + 1)?,
                mass: parse_field(f[3], i + 1)?,
                mu: parse_field(f[4], i + 1)?,
                sup_norm: need(5)?,
                boundary_flux: need(6)?,
            })
        })
        .collect()
}

/// Profiles as `solution,r,u,uprime` rows.
pub fn profiles_csv(sols: &[RadialSolution]) -> String {
    let mut out = String::from("solution,r,u,uprime\n");
    for (k, s) in sols.iter().enumerate() {
        for i in 0..s.r.len() {
            out.push_str(&format!("{k},{},{},{}\n", fmt_f64(s.r[i]), fmt_f64(s.u[i]), fmt_f64(s.uprime[i])));
        }
    }
    out
}

/// `# rtol=… atol=… subdivisions=…` line for formats without a metadata slot.
pub fn tolerance_comment(tol: &Tolerances, subdivisions: usize) -> String {
    format!("# rtol={} atol={} subdivisions={subdivisions}", fmt_f64(tol.rtol), fmt_f64(tol.atol))
}

pub fn tolerance_json(tol: &Tolerances, subdivisions: usize) -> Value {
    serde_json::json!({ "rtol": tol.rtol, "atol": tol.atol, "subdivisions": subdivisions })
}

/// Serializes `body` as a JSON object with the tolerance metadata added.
pub fn with_metadata(body: &impl Serialize, tol: &Tolerances, subdivisions: usize) -> Result<Value> {
    let mut map = match serde_json::to_value(body).map_err(|e| Error::InvalidInput(e.to_string()))? {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("result".into(), other);
            m
        }
    };
    map.insert("tolerances".into(), tolerance_json(tol, subdivisions));
    Ok(Value::Object(map))
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}
