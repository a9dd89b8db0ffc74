//! Simulation-based validation, independent of the algebraic checkers.
//!
//! Continuous trajectories use the exact matrix exponential, so `dt` only
//! controls how densely a trajectory is observed.

use serde::Serialize;
use thiserror::Error;

use crate::conditions::{CheckReport, Verdict, WitnessKind};
use crate::numerics::{self, dot, norm2, Matrix, NumericsError};
use crate::problem::{Problem, TimeRegime, Tolerances};
use crate::sets::{self, Classification, SetDescription, SetError};

/// Trajectories whose norm exceeds this are treated as divergent.
pub const OVERFLOW_CAP: f64 = 1e150;
/// Sub-step refinements `dt·2^-k` checked when replaying a continuous witness.
const REFINEMENTS: i32 = 20;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("trajectory overflow at step {step} (norm {norm:.3e})")]
    Overflow { step: usize, norm: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Set(#[from] SetError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    /// Step index for discrete systems, time for continuous ones.
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

/// Observation step for continuous systems: `min(0.1/‖A‖_F, 0.05)`.
pub fn observation_dt(a: &Matrix) -> f64 {
    let f = a.frobenius_norm();
    if f == 0.0 {
        0.05
    } else {
        (0.1 / f).min(0.05)
    }
}

fn check_dims(a: &Matrix, x0: &[f64]) -> Result<(), OracleError> {
    if !a.is_square() || a.rows() != x0.len() {
        return Err(OracleError::DimensionMismatch(format!(
            "A is {}x{} but x0 has {} entries",
            a.rows(),
            a.cols(),
            x0.len()
        )));
    }
    Ok(())
}

fn step_map(a: &Matrix, time: TimeRegime, dt: f64) -> Result<Matrix, OracleError> {
    match time {
        TimeRegime::Discrete => Ok(a.clone()),
        TimeRegime::Continuous => {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(OracleError::Invalid(format!("dt must be positive, got {dt}")));
            }
            Ok(numerics::mat_exp(a, dt)?)
        }
    }
}

/// `steps` iterations of the discrete map, or samples of `e^{At} x0` at `t = j·dt`.
pub fn simulate(a: &Matrix, time: TimeRegime, x0: &[f64], steps: usize, dt: f64) -> Result<Trajectory, OracleError> {
    check_dims(a, x0)?;
    let e = step_map(a, time, dt)?;
    let unit = if time == TimeRegime::Discrete { 1.0 } else { dt };
    let mut times = vec![0.0];
    let mut states = vec![x0.to_vec()];
    let mut x = x0.to_vec();
    for k in 1..=steps {
        x = e.mul_vec(&x);
        let norm = norm2(&x);
        if !(norm <= OVERFLOW_CAP) {
            return Err(OracleError::Overflow { step: k, norm });
        }
        times.push(k as f64 * unit);
        states.push(x.clone());
    }
    Ok(Trajectory { times, states })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exit {
    pub start: Vec<f64>,
    /// Whole steps taken (zero for sub-step observation times).
    pub step: usize,
    pub time: f64,
    pub state: Vec<f64>,
    pub margin: f64,
}

/// Observation schedule for continuous replays: sub-steps first, then `j·dt`.
fn continuous_schedule(a: &Matrix, steps: usize) -> Result<Vec<(usize, f64, Matrix)>, OracleError> {
    let dt = observation_dt(a);
    let mut out = Vec::with_capacity(REFINEMENTS as usize + 1);
    for k in (1..=REFINEMENTS).rev() {
        let t = dt * 2f64.powi(-k);
        out.push((0, t, numerics::mat_exp(a, t)?));
    }
    if steps > 0 {
        out.push((1, dt, numerics::mat_exp(a, dt)?));
    }
    Ok(out)
}

/// The first observed state of the trajectory from `x0` that lies outside
/// the set by more than `tol`.
pub fn first_exit(
    a: &Matrix,
    time: TimeRegime,
    set: &SetDescription,
    x0: &[f64],
    tol: f64,
    steps: usize,
) -> Result<Option<Exit>, OracleError> {
    check_dims(a, x0)?;
    match time {
        TimeRegime::Discrete => discrete_exit(a, set, x0, tol, steps),
        TimeRegime::Continuous => {
            let schedule = continuous_schedule(a, steps)?;
            continuous_exit(&schedule, set, x0, tol, steps)
        }
    }
}

fn discrete_exit(a: &Matrix, set: &SetDescription, x0: &[f64], tol: f64, steps: usize) -> Result<Option<Exit>, OracleError> {
    let mut x = x0.to_vec();
    for k in 1..=steps {
        x = a.mul_vec(&x);
        if !(norm2(&x) <= OVERFLOW_CAP) {
            break;
        }
        let margin = sets::escape_margin(set, &x)?;
        if margin > tol {
            return Ok(Some(Exit { start: x0.to_vec(), step: k, time: k as f64, state: x, margin }));
        }
    }
    Ok(None)
}

fn continuous_exit(
    schedule: &[(usize, f64, Matrix)],
    set: &SetDescription,
    x0: &[f64],
    tol: f64,
    steps: usize,
) -> Result<Option<Exit>, OracleError> {
    let (sub, whole) = match schedule.split_last() {
        Some((last, rest)) if last.0 == 1 => (rest, Some(last)),
        _ => (schedule, None),
    };
    for (_, t, e) in sub {
        let x = e.mul_vec(x0);
        let margin = sets::escape_margin(set, &x)?;
        if margin > tol {
            return Ok(Some(Exit { start: x0.to_vec(), step: 0, time: *t, state: x, margin }));
        }
    }
    if let Some((_, dt, e)) = whole {
        let mut x = x0.to_vec();
        for j in 1..=steps {
            x = e.mul_vec(&x);
            if !(norm2(&x) <= OVERFLOW_CAP) {
                break;
            }
            let margin = sets::escape_margin(set, &x)?;
            if margin > tol {
                return Ok(Some(Exit { start: x0.to_vec(), step: j, time: j as f64 * dt, state: x, margin }));
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Escape {
    pub sample: usize,
    pub exit: Exit,
}

/// Starting points for falsification: three quarters on the boundary, the rest inside.
pub fn sample_starts(set: &SetDescription, samples: usize, seed: u64) -> Result<Vec<Vec<f64>>, OracleError> {
    let interior = samples / 4;
    let boundary = samples - interior;
    let mut pts = Vec::with_capacity(samples);
    if boundary > 0 {
        match sets::sample_boundary(set, boundary, seed) {
            Ok(b) => pts.extend(b.points),
            Err(SetError::DegenerateSet(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    let rest = samples - pts.len();
    if rest > 0 {
        pts.extend(sets::sample_interior(set, rest, seed)?);
    }
    Ok(pts)
}

/// Searches sampled trajectories for one that leaves the set; returns the
/// earliest `(sample, step)` escape.
pub fn falsify(problem: &Problem, samples: usize, steps: usize, seed: u64) -> Result<Option<Escape>, OracleError> {
    let tol = problem.tolerances.membership;
    let starts = sample_starts(&problem.set, samples, seed)?;
    let schedule = match problem.time {
        TimeRegime::Continuous => Some(continuous_schedule(&problem.a, steps)?),
        TimeRegime::Discrete => None,
    };
    for (i, x) in starts.iter().enumerate() {
        let exit = match &schedule {
            None => discrete_exit(&problem.a, &problem.set, x, tol, steps)?,
            Some(s) => continuous_exit(s, &problem.set, x, tol, steps)?,
        };
        if let Some(exit) = exit {
            return Ok(Some(Escape { sample: i, exit }));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NagumoReport {
    pub checked: usize,
    pub violations: usize,
    /// Largest normalized outward component of `Ax` over the samples.
    pub worst_margin: f64,
    pub worst_point: Option<Vec<f64>>,
    pub clean: bool,
}

/// Samples boundary points and tests `Ax ∈ T_S(x)` at each.
pub fn nagumo_sample_check(problem: &Problem, samples: usize, seed: u64) -> Result<NagumoReport, OracleError> {
    if problem.time != TimeRegime::Continuous {
        return Err(OracleError::Invalid("the Nagumo check applies to continuous systems".into()));
    }
    let tol = problem.tolerances.membership;
    let set = &problem.set;
    let pts = sets::sample_boundary(set, samples.max(1), seed)?.points;
    let mut report = NagumoReport { checked: 0, violations: 0, worst_margin: f64::NEG_INFINITY, worst_point: None, clean: true };
    for x in pts {
        let v = problem.a.mul_vec(&x);
        let contains = match sets::tangent_cone_contains(set, &x, &v, tol) {
            Ok(c) => c,
            Err(SetError::NotOnBoundary(_)) => continue,
            Err(e) => return Err(e.into()),
        };
        report.checked += 1;
        let margin = outward_margin(set, &x, &v, tol)?;
        if !contains {
            report.violations += 1;
            report.clean = false;
        }
        if margin > report.worst_margin {
            report.worst_margin = margin;
            report.worst_point = Some(x);
        }
    }
    Ok(report)
}

fn outward_margin(set: &SetDescription, x: &[f64], v: &[f64], tol: f64) -> Result<f64, OracleError> {
    let q = match set {
        SetDescription::Ellipsoid(e) => Some(&e.q),
        SetDescription::Quadratic(s) => Some(&s.q),
        SetDescription::LorenzCone(c) => Some(&c.q),
        SetDescription::DoubleCone(d) => Some(&d.cone.q),
        _ => None,
    };
    if let Some(q) = q {
        let qx = q.mul_vec(x);
        return Ok(dot(v, &qx) / (norm2(v) * norm2(&qx)).max(1.0));
    }
    if let SetDescription::HPolyhedron(p) | SetDescription::HCone(p) = set {
        let xs = norm2(x).max(1.0);
        let vs = norm2(v).max(1.0);
        let mut worst = f64::NEG_INFINITY;
        for i in 0..p.g.rows() {
            let row = p.g.row(i);
            let rn = norm2(row);
            if (p.b[i] - dot(row, x)) / rn <= tol * xs {
                worst = worst.max(dot(row, v) / (rn * vs));
            }
        }
        return Ok(worst);
    }
    let h = 1e-6 / norm2(v).max(1.0);
    let y: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + h * b).collect();
    Ok(sets::escape_margin(set, &y)? / h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OracleBudget {
    pub samples: usize,
    pub steps: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self { samples: 200, steps: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Consistency {
    pub consistent: bool,
    pub detail: String,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub escape: Option<Escape>,
}

/// Re-checks a report against simulation: Invariant claims must survive
/// falsification, NotInvariant witnesses must replay.
pub fn cross_validate(problem: &Problem, report: &CheckReport, budget: OracleBudget) -> Result<Consistency, OracleError> {
    let mut out = Consistency {
        consistent: true,
        detail: String::new(),
        seed: problem.seed,
        tolerances: problem.tolerances,
        escape: None,
    };
    match report.verdict {
        Verdict::Invariant => {
            if let Some(e) = falsify(problem, budget.samples, budget.steps, problem.seed)? {
                out.consistent = false;
                out.detail = format!("defect: sample {} leaves the set at t = {} despite an Invariant verdict", e.sample, e.exit.time);
                out.escape = Some(e);
            } else {
                out.detail = "no escape found within budget".into();
            }
        }
        Verdict::NotInvariant => match report.witness() {
            Some(w) => match replay(problem, &w.point, w.kind, w.step.unwrap_or(0).max(budget.steps))? {
                Some(how) => out.detail = format!("witness confirmed by {how}"),
                None => {
                    out.consistent = false;
                    out.detail = "defect: stored witness does not replay".into();
                }
            },
            None => {
                let mandatory = matches!(
                    problem.set,
                    SetDescription::HPolyhedron(_)
                        | SetDescription::HCone(_)
                        | SetDescription::VPolyhedron(_)
                        | SetDescription::VCone(_)
                        | SetDescription::Ellipsoid(_)
                );
                if mandatory {
                    out.consistent = false;
                    out.detail = "defect: NotInvariant without a witness".into();
                } else {
                    out.escape = falsify(problem, budget.samples, budget.steps, problem.seed)?;
                    out.detail = match &out.escape {
                        Some(_) => "no stored witness; the oracle found an escape".into(),
                        None => "no stored witness; none required for this set".into(),
                    };
                }
            }
        },
        Verdict::Inconclusive => out.detail = "inconclusive verdicts are not cross-validated".into(),
    }
    Ok(out)
}

/// Replays a witness: an exit along the trajectory, or for continuous
/// systems a tangent-cone violation at a boundary point.
pub fn replay(problem: &Problem, point: &[f64], kind: WitnessKind, steps: usize) -> Result<Option<&'static str>, OracleError> {
    let tol = problem.tolerances.membership;
    if first_exit(&problem.a, problem.time, &problem.set, point, tol, steps)?.is_some() {
        return Ok(Some("trajectory exit"));
    }
    if problem.time == TimeRegime::Continuous && kind == WitnessKind::OutwardFlow {
        let m = sets::membership(&problem.set, point, tol)?;
        if m.classification == Classification::Boundary {
            let v = problem.a.mul_vec(point);
            if !sets::tangent_cone_contains(&problem.set, point, &v, tol)? {
                return Ok(Some("tangent-cone violation"));
            }
        }
    }
    Ok(None)
}
