//! Euler discretization of continuous systems and a grid search for
//! steplengths that keep the discrete map invariant.

use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conditions::{self, CheckError, Verdict};
use crate::numerics::{self, Matrix, NumericsError};
use crate::problem::{Problem, TimeRegime};

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("invalid step: {0}")]
    InvalidStep(String),
    #[error("the problem must be continuous-time")]
    NotContinuous,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Check(#[from] CheckError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EulerMethod {
    /// `x_{k+1} = (I + dt A) x_k`
    Forward,
    /// `x_{k+1} = (I − dt A)^{-1} x_k`
    Backward,
}

impl FromStr for EulerMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "forward" => Ok(EulerMethod::Forward),
            "backward" => Ok(EulerMethod::Backward),
            other => Err(format!("unknown Euler method '{other}' (expected forward or backward)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerSpec {
    pub method: EulerMethod,
    pub dt: f64,
}

pub fn discretize(a: &Matrix, spec: EulerSpec) -> Result<Matrix, BridgeError> {
    if !(spec.dt > 0.0 && spec.dt.is_finite()) {
        return Err(BridgeError::InvalidStep(format!("dt must be positive, got {}", spec.dt)));
    }
    if !a.is_square() {
        return Err(NumericsError::DimensionMismatch("A must be square".into()).into());
    }
    let i = Matrix::identity(a.rows());
    match spec.method {
        EulerMethod::Forward => Ok(i.add(&a.scale(spec.dt))),
        EulerMethod::Backward => Ok(numerics::invert(&i.sub(&a.scale(spec.dt)), numerics::DEFAULT_SINGULAR_TOL)?),
    }
}

/// `points` log-spaced steps in `[1e-4, 2] / ‖A‖_F` (unscaled when `A = 0`).
pub fn default_grid(a: &Matrix, points: usize) -> Vec<f64> {
    let f = a.frobenius_norm();
    let scale = if f > 0.0 { 1.0 / f } else { 1.0 };
    let (lo, hi) = (1e-4f64.ln(), 2f64.ln());
    match points {
        0 => Vec::new(),
        1 => vec![2.0 * scale],
        _ => (0..points)
            .map(|k| (lo + (hi - lo) * k as f64 / (points - 1) as f64).exp() * scale)
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepVerdict {
    pub dt: f64,
    /// `None` when the backward step is singular.
    pub verdict: Option<Verdict>,
    pub passes: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteplengthReport {
    pub method: EulerMethod,
    /// Empirical largest passing step on the grid; not a proven supremum.
    pub largest_passing: Option<f64>,
    pub table: Vec<StepVerdict>,
}

/// Runs the discrete checker on the Euler map for each grid step.
pub fn max_preserving_dt(problem: &Problem, method: EulerMethod, grid: &[f64]) -> Result<SteplengthReport, BridgeError> {
    if problem.time != TimeRegime::Continuous {
        return Err(BridgeError::NotContinuous);
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(BridgeError::InvalidStep("grid must be sorted ascending".into()));
    }
    let mut table = Vec::with_capacity(grid.len());
    for &dt in grid {
        let row = match discretize(&problem.a, EulerSpec { method, dt }) {
            Ok(ad) => {
                let mut discrete = problem.clone();
                discrete.a = ad;
                discrete.time = TimeRegime::Discrete;
                let r = conditions::check(&discrete)?;
                StepVerdict { dt, verdict: Some(r.verdict), passes: r.verdict == Verdict::Invariant, note: None }
            }
            Err(BridgeError::Numerics(NumericsError::Singular { .. })) => {
                StepVerdict { dt, verdict: None, passes: false, note: Some("I - dt A is singular".into()) }
            }
            Err(e) => return Err(e),
        };
        table.push(row);
    }
    let largest_passing = table.iter().filter(|r| r.passes).map(|r| r.dt).fold(None, |m: Option<f64>, d| {
        Some(m.map_or(d, |m| m.max(d)))
    });
    Ok(SteplengthReport { method, largest_passing, table })
}
