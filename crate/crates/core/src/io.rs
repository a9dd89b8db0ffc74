//! Problem and report files.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::conditions::{CheckReport, Certificate, CheckError, Refutation, VerifyOutcome};
use crate::numerics::Matrix;
use crate::problem::{Problem, TimeRegime, Tolerances};
use crate::sets::{self, SetSpec};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InputError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("validation error: {}", .0.join("; "))]
    Validation(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    #[serde(rename = "A")]
    pub a: Matrix,
    pub time: TimeRegime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub system: SystemFile,
    pub set: SetSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Starting point for `simulate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
}

fn schema(path: &str, message: impl Into<String>) -> InputError {
    InputError::Schema { path: path.into(), message: message.into() }
}

pub fn parse_problem(text: &str) -> Result<Problem, InputError> {
    let value: Value = serde_json::from_str(text).map_err(|e| InputError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let file: ProblemFile = serde_json::from_value(value.clone()).map_err(|e| schema(&locate(&value, &e), e.to_string()))?;
    problem_from_file(file)
}

/// Best-effort pointer to the offending top-level section.
fn locate(value: &Value, err: &serde_json::Error) -> String {
    let msg = err.to_string();
    for key in ["system", "set", "tolerances", "seed", "x0"] {
        if value.get(key).is_none() && msg.contains(&format!("`{key}`")) {
            return format!("/{key}");
        }
    }
    if msg.contains("variant") || msg.contains("`type`") {
        return "/set/type".into();
    }
    if value.get("system").map_or(false, |s| serde_json::from_value::<SystemFile>(s.clone()).is_err()) {
        return "/system".into();
    }
    if value.get("set").map_or(false, |s| serde_json::from_value::<SetSpec>(s.clone()).is_err()) {
        return "/set".into();
    }
    "/".into()
}

pub fn problem_from_file(file: ProblemFile) -> Result<Problem, InputError> {
    let a = file.system.a;
    if !a.is_square() {
        return Err(schema("/system/A", format!("A must be square, got {}x{}", a.rows(), a.cols())));
    }
    let n = a.rows();
    if let Some(d) = spec_dim(&file.set) {
        if d != n {
            return Err(schema("/set", format!("set lives in R^{d} but A is {n}x{n}")));
        }
    }
    let report = sets::validate(&file.set);
    if !report.is_valid() {
        return Err(InputError::Validation(report.violations));
    }
    let set = file.set.build().map_err(|e| InputError::Validation(vec![e.to_string()]))?;
    if let Some(x0) = &file.x0 {
        if x0.len() != n {
            return Err(schema("/x0", format!("x0 has {} entries but A is {n}x{n}", x0.len())));
        }
    }
    let mut p = Problem::new(a, file.system.time, set);
    if let Some(t) = file.tolerances {
        p.tolerances = t;
    }
    p.seed = file.seed.unwrap_or(0);
    p.x0 = file.x0;
    Ok(p)
}

fn spec_dim(spec: &SetSpec) -> Option<usize> {
    match spec {
        SetSpec::HPolyhedron { g, .. } | SetSpec::HCone { g } => Some(g.cols()),
        SetSpec::VPolyhedron { vertices, rays } => vertices.first().or(rays.first()).map(Vec::len),
        SetSpec::VCone { rays } => rays.first().map(Vec::len),
        SetSpec::Ellipsoid { q } | SetSpec::LorenzCone { q, .. } | SetSpec::Quadratic { q } | SetSpec::DoubleCone { q } => {
            Some(q.cols())
        }
    }
}

pub fn problem_to_file(p: &Problem) -> ProblemFile {
    ProblemFile {
        system: SystemFile { a: p.a.clone(), time: p.time },
        set: p.set.to_spec(),
        tolerances: Some(p.tolerances),
        seed: Some(p.seed),
        x0: p.x0.clone(),
    }
}

pub fn serialize_problem(p: &Problem) -> String {
    serde_json::to_string_pretty(&problem_to_file(p)).expect("problem serializes")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub verdict: crate::conditions::Verdict,
    pub check: String,
    pub certificate: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refutation: Option<Refutation>,
    #[serde(default)]
    pub diagnostics: BTreeMap<String, Value>,
    pub tolerances: Tolerances,
    pub tool_version: String,
    pub seed: u64,
    #[serde(default)]
    pub elapsed_ms: f64,
}

/// Certificate JSON; scalar certificates also carry their value under `mu` or `eta`.
pub fn certificate_json(c: &Certificate) -> Value {
    let mut v = serde_json::to_value(c).expect("certificate serializes");
    if let Certificate::ScalarLmi { parameter, value, .. } = c {
        let key = serde_json::to_value(parameter).ok().and_then(|k| k.as_str().map(str::to_string));
        if let (Some(key), Some(obj)) = (key, v.as_object_mut()) {
            obj.insert(key, Value::from(*value));
        }
    }
    v
}

pub fn certificate_from_json(v: &Value) -> Result<Certificate, InputError> {
    let mut v = v.clone();
    if let Some(obj) = v.as_object_mut() {
        obj.remove("mu");
        obj.remove("eta");
    }
    serde_json::from_value(v).map_err(|e| schema("/certificate", e.to_string()))
}

pub fn report_file(report: &CheckReport, seed: u64) -> ReportFile {
    ReportFile {
        verdict: report.verdict,
        check: report.check.clone(),
        certificate: certificate_json(&report.certificate),
        refutation: report.refutation.clone(),
        diagnostics: report.diagnostics.clone(),
        tolerances: report.tolerances,
        tool_version: TOOL_VERSION.to_string(),
        seed,
        elapsed_ms: report.elapsed_ms,
    }
}

pub fn parse_report(text: &str) -> Result<ReportFile, InputError> {
    let value: Value = serde_json::from_str(text).map_err(|e| InputError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    serde_json::from_value(value).map_err(|e| schema("/", e.to_string()))
}

/// Re-verifies a stored certificate against the problem, using the
/// tolerances recorded in the report.
pub fn verify_report(problem: &Problem, report: &ReportFile) -> Result<VerifyOutcome, VerifyError> {
    let cert = certificate_from_json(&report.certificate)?;
    Ok(cert.verify(&problem.a, problem.time, &problem.set, &report.tolerances)?)
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error(transparent)]
    Check(#[from] CheckError),
}
