//! Invariance checkers for linear systems on polyhedra, ellipsoids, quadratic
//! sets and Lorenz cones, plus the scalar-interval diagnostics.
//!
//! Every checker returns a [`CheckReport`]. `Invariant` always carries a
//! certificate that [`Certificate::verify`] accepts; `NotInvariant` for
//! polyhedra and ellipsoids always carries a witness point.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::lp::{self, FeasOutcome, LinearProgramFeas, LpError, LpOutcome, VarSign};
use crate::numerics::{self, classify_lambda_max, dot, norm2, Definiteness, Matrix, NumericsError};
use crate::oracle;
use crate::problem::{Problem, TimeRegime, Tolerances};
use crate::sets::{
    self, Classification, DoubleCone, Ellipsoid, HPolyhedron, LorenzCone, QuadraticSet, SetDescription, SetError,
    VPolyhedron,
};

/// Steps used when replaying a discrete witness.
pub const WITNESS_REPLAY_STEPS: usize = 50;
const SEARCH_MAX_ITER: usize = 200;
/// Roundoff allowance added to every definiteness band during certificate checks.
const VERIFY_FLOOR: f64 = 1e-14;
const INTERVAL_ROUNDOFF: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum CheckError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("no checker for {0}")]
    Unsupported(String),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Oracle(#[from] oracle::OracleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Invariant,
    NotInvariant,
    Inconclusive,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Invariant => 0,
            Verdict::NotInvariant => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarKind {
    Mu,
    Eta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    H,
    V,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// `H ≥ 0`, `HG = GA`, `Hb ≤ b`.
    NonnegMatrix { h: Matrix },
    /// Off-diagonal nonnegative `H̃` (with `H̃G = GA`, `H̃b ≤ 0`) or `L̃`
    /// (with `XL̃ = AX`, zero vertex-block column sums).
    OdNonnegMatrix { representation: Representation, matrix: Matrix },
    /// `L ≥ 0`, `XL = AX`, vertex-block column sums 1 on vertex columns, 0 on ray columns.
    VRepMatrix { l: Matrix },
    ScalarLmi {
        parameter: ScalarKind,
        value: f64,
        lambda_max: f64,
        #[serde(default)]
        side_conditions: BTreeMap<String, f64>,
    },
    SufficientOnly { lambda_max: f64 },
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyOutcome {
    pub valid: bool,
    pub max_residual: f64,
    pub detail: String,
}

impl VerifyOutcome {
    fn new(violations: Vec<String>, max_residual: f64) -> Self {
        let valid = violations.is_empty();
        let detail = if valid { "ok".to_string() } else { violations.join("; ") };
        Self { valid, max_residual, detail }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// The trajectory from `point` leaves the set at `step` / `time`.
    Exit,
    /// `A point` is not in the tangent cone at the boundary point `point`.
    OutwardFlow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub point: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    /// Escape margin of the exit state, or the normalized outward rate.
    pub margin: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Refutation {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subproblem: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub check: String,
    pub certificate: Certificate,
    pub refutation: Option<Refutation>,
    pub diagnostics: BTreeMap<String, Value>,
    pub tolerances: Tolerances,
    pub elapsed_ms: f64,
}

impl CheckReport {
    fn new(check: &str, tol: &Tolerances) -> Self {
        Self {
            verdict: Verdict::Inconclusive,
            check: check.to_string(),
            certificate: Certificate::None,
            refutation: None,
            diagnostics: BTreeMap::new(),
            tolerances: *tol,
            elapsed_ms: 0.0,
        }
    }

    fn diag(&mut self, key: &str, value: impl Serialize) {
        self.diagnostics.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn witness(&self) -> Option<&Witness> {
        self.refutation.as_ref().and_then(|r| r.witness.as_ref())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarInterval {
    pub lo: f64,
    pub hi: f64,
    pub empty: bool,
}

impl ScalarInterval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi, empty: lo > hi }
    }

    pub fn contains(&self, t: f64, slack: f64) -> bool {
        t >= self.lo - slack && t <= self.hi + slack
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalMode {
    Full,
    Simple,
}

#[cfg(not(target_arch = "wasm32"))]
fn timed(check: impl FnOnce() -> Result<CheckReport, CheckError>) -> Result<CheckReport, CheckError> {
    let start = std::time::Instant::now();
    let mut r = check()?;
    r.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(r)
}

// No monotonic clock on wasm32-unknown-unknown; elapsed_ms stays 0.
#[cfg(target_arch = "wasm32")]
fn timed(check: impl FnOnce() -> Result<CheckReport, CheckError>) -> Result<CheckReport, CheckError> {
    check()
}

fn square_dim(a: &Matrix, n: usize) -> Result<(), CheckError> {
    if !a.is_square() || a.rows() != n {
        return Err(CheckError::DimensionMismatch(format!(
            "A is {}x{} but the set lives in R^{n}",
            a.rows(),
            a.cols()
        )));
    }
    Ok(())
}

fn lmax(m: &Matrix, tol: &Tolerances) -> Result<f64, CheckError> {
    Ok(numerics::sym_eig(&m.symmetric_part(), tol.eig)?.lambda_max())
}

fn quad_form(a: &Matrix, q: &Matrix) -> Matrix {
    (&(&a.transpose() * q) * a).symmetric_part()
}

fn lyapunov(a: &Matrix, q: &Matrix) -> Matrix {
    (&a.transpose() * q).add(&(q * a)).symmetric_part()
}

fn exit_witness(exit: oracle::Exit) -> Witness {
    Witness { kind: WitnessKind::Exit, point: exit.start, step: Some(exit.step), time: Some(exit.time), margin: exit.margin }
}

/// Replays `x` under the discrete map and returns a witness when it exits.
fn confirm_discrete(a: &Matrix, set: &SetDescription, x: &[f64], tol: &Tolerances) -> Result<Option<Witness>, CheckError> {
    let exit = oracle::first_exit(a, TimeRegime::Discrete, set, x, tol.membership, WITNESS_REPLAY_STEPS)?;
    Ok(exit.map(exit_witness))
}

/// Outward-flow witness at a boundary point, with an exit time when replay finds one.
fn outward_witness(
    a: &Matrix,
    set: &SetDescription,
    x: &[f64],
    rate: f64,
    tol: &Tolerances,
) -> Result<Witness, CheckError> {
    if let Some(exit) = oracle::first_exit(a, TimeRegime::Continuous, set, x, tol.membership, WITNESS_REPLAY_STEPS)? {
        return Ok(exit_witness(exit));
    }
    Ok(Witness { kind: WitnessKind::OutwardFlow, point: x.to_vec(), step: None, time: None, margin: rate })
}

fn refute(report: &mut CheckReport, subproblem: Option<usize>, condition: Option<String>, witness: Option<Witness>) {
    report.refutation = Some(Refutation { subproblem, condition, witness });
}

// ---------------------------------------------------------------------------
// Polyhedra
// ---------------------------------------------------------------------------

/// `x_{k+1} = A x_k` on `{Gx ≤ b}`: one LP per row for `H ≥ 0` with `HG = GA`, `Hb ≤ b`.
pub fn check_discrete_polyhedron(a: &Matrix, p: &HPolyhedron, tol: &Tolerances) -> Result<CheckReport, CheckError> {
    timed(|| h_polyhedron(a, p, tol, TimeRegime::Discrete))
}

/// `x' = A x` on `{Gx ≤ b}`: one LP per row for off-diagonal nonnegative `H̃`.
pub fn check_continuous_polyhedron(a: &Matrix, p: &HPolyhedron, tol: &Tolerances) -> Result<CheckReport, CheckError> {
    timed(|| h_polyhedron(a, p, tol, TimeRegime::Continuous))
}

fn h_polyhedron(a: &Matrix, p: &HPolyhedron, tol: &Tolerances, time: TimeRegime) -> Result<CheckReport, CheckError> {
    let (g, b) = (&p.g, &p.b);
    let (m, n) = (g.rows(), g.cols());
    square_dim(a, n)?;
    let name = match time {
        TimeRegime::Discrete => "discrete_polyhedron",
        TimeRegime::Continuous => "continuous_polyhedron",
    };
    let mut report = CheckReport::new(name, tol);
    let set = SetDescription::HPolyhedron(p.clone());
    let ga = g.matmul(a)?;
    let settings = tol.lp_settings();
    let mut rows = Vec::with_capacity(m);
    let mut unresolved = Vec::new();
    for i in 0..m {
        let mut prog = LinearProgramFeas::new(m);
        for k in 0..n {
            prog.add_eq((0..m).map(|j| g[(j, k)]).collect(), ga[(i, k)]);
        }
        match time {
            TimeRegime::Discrete => {
                prog.add_le(b.clone(), b[i]);
            }
            TimeRegime::Continuous => {
                prog.set_sign(i, VarSign::Free);
                prog.add_le(b.clone(), 0.0);
            }
        }
        match lp::solve_feasibility(&prog, settings)? {
            FeasOutcome::Feasible(h) => rows.push(h),
            FeasOutcome::Infeasible(_) => {
                let witness = match time {
                    TimeRegime::Discrete => discrete_h_witness(a, &set, p, ga.row(i), i, tol)?,
                    TimeRegime::Continuous => continuous_h_witness(a, &set, p, ga.row(i), i, tol)?,
                };
                match witness {
                    Some(w) => {
                        report.verdict = Verdict::NotInvariant;
                        refute(&mut report, Some(i), None, Some(w));
                        return Ok(report);
                    }
                    None => {
                        unresolved.push(i);
                        rows.push(vec![0.0; m]);
                    }
                }
            }
        }
    }
    if !unresolved.is_empty() {
        report.diag("infeasible_rows_without_witness", &unresolved);
        refute(&mut report, unresolved.first().copied(), Some("subproblem infeasible within tolerance".into()), None);
        return Ok(report);
    }
    let h = Matrix::from_rows(&rows)?;
    let cert = match time {
        TimeRegime::Discrete => Certificate::NonnegMatrix { h },
        TimeRegime::Continuous => Certificate::OdNonnegMatrix { representation: Representation::H, matrix: h },
    };
    finish_with_certificate(&mut report, cert, a, time, &set, tol)?;
    Ok(report)
}

fn finish_with_certificate(
    report: &mut CheckReport,
    cert: Certificate,
    a: &Matrix,
    time: TimeRegime,
    set: &SetDescription,
    tol: &Tolerances,
) -> Result<(), CheckError> {
    let check = cert.verify(a, time, set, tol)?;
    report.diag("certificate_residual", check.max_residual);
    report.verdict = if check.valid { Verdict::Invariant } else { Verdict::Inconclusive };
    if !check.valid {
        report.diag("certificate_failure", &check.detail);
    }
    report.certificate = cert;
    Ok(())
}

/// A point of `P` maximizing `(GA)_i x`, pushed far along an unbounded ray if needed.
fn discrete_h_witness(
    a: &Matrix,
    set: &SetDescription,
    p: &HPolyhedron,
    c: &[f64],
    i: usize,
    tol: &Tolerances,
) -> Result<Option<Witness>, CheckError> {
    let x = match lp::maximize_linear(c, &p.g, &p.b, tol.lp_settings())? {
        LpOutcome::Optimum { x, .. } => x,
        LpOutcome::Unbounded { point, direction } => {
            let slope = dot(c, &direction);
            let target = p.b[i] + 1.0 + p.b[i].abs();
            let t = ((target - dot(c, &point)) / slope).max(0.0);
            point.iter().zip(&direction).map(|(x, d)| x + t * d).collect()
        }
        LpOutcome::Infeasible => return Ok(None),
    };
    confirm_discrete(a, set, &x, tol)
}

/// A boundary point on facet `i` maximizing the outward rate `G_i A x`.
fn continuous_h_witness(
    a: &Matrix,
    set: &SetDescription,
    p: &HPolyhedron,
    c: &[f64],
    i: usize,
    tol: &Tolerances,
) -> Result<Option<Witness>, CheckError> {
    let n = p.g.cols();
    let mut prog = LinearProgramFeas::new(n);
    prog.set_all_free();
    for r in 0..p.g.rows() {
        if r == i {
            prog.add_eq(p.g.row(r).to_vec(), p.b[r]);
        } else {
            prog.add_le(p.g.row(r).to_vec(), p.b[r]);
        }
    }
    let gi = norm2(p.g.row(i));
    let rate = |x: &[f64]| dot(c, x) / (gi * x_scale(x));
    let x = match lp::maximize(&prog, c, tol.lp_settings())? {
        LpOutcome::Optimum { x, .. } => x,
        LpOutcome::Unbounded { point, direction } => [0.0, 1.0, 10.0, 100.0, 1e3, 1e4]
            .iter()
            .map(|t| point.iter().zip(&direction).map(|(x, d)| x + t * d).collect::<Vec<f64>>())
            .fold(None::<Vec<f64>>, |best, x| match best {
                Some(b) if rate(&b) >= rate(&x) => Some(b),
                _ => Some(x),
            })
            .unwrap_or(point),
        LpOutcome::Infeasible => return Ok(None),
    };
    let r = rate(&x);
    if r <= tol.membership {
        return Ok(None);
    }
    Ok(Some(outward_witness(a, set, &x, r, tol)?))
}

fn x_scale(x: &[f64]) -> f64 {
    norm2(x).max(1.0)
}

/// Columns `[x^1 … x^ℓ1 x̂^1 … x̂^ℓ2]`.
fn generators(p: &VPolyhedron) -> Vec<Vec<f64>> {
    p.vertices.iter().chain(p.rays.iter()).cloned().collect()
}

fn v_set(p: &VPolyhedron) -> SetDescription {
    if p.vertices.is_empty() {
        SetDescription::VCone(p.clone())
    } else {
        SetDescription::VPolyhedron(p.clone())
    }
}

/// Solves `Σ_j w_j col_j = target` over the given columns.
fn combination(
    cols: &[Vec<f64>],
    target: &[f64],
    signs: &[VarSign],
    sums: &[(std::ops::Range<usize>, f64)],
    tol: &Tolerances,
) -> Result<Option<Vec<f64>>, CheckError> {
    let mut prog = LinearProgramFeas::new(cols.len());
    for (j, s) in signs.iter().enumerate() {
        prog.set_sign(j, *s);
    }
    for (k, &t) in target.iter().enumerate() {
        prog.add_eq(cols.iter().map(|c| c[k]).collect(), t);
    }
    for (range, rhs) in sums {
        let mut row = vec![0.0; cols.len()];
        row[range.clone()].iter_mut().for_each(|v| *v = 1.0);
        prog.add_eq(row, *rhs);
    }
    match lp::solve_feasibility(&prog, tol.lp_settings())? {
        FeasOutcome::Feasible(z) => Ok(Some(z)),
        FeasOutcome::Infeasible(_) => Ok(None),
    }
}

/// Discrete map on a V-polyhedron: `XL = AX` with `L ≥ 0`.
pub fn check_discrete_v_polyhedron(a: &Matrix, p: &VPolyhedron, tol: &Tolerances) -> Result<CheckReport, CheckError> {
    timed(|| v_polyhedron(a, p, tol, TimeRegime::Discrete))
}

/// Continuous flow on a V-polyhedron: `XL̃ = AX` with `L̃` off-diagonal nonnegative.
pub fn check_continuous_v_polyhedron(a: &Matrix, p: &VPolyhedron, tol: &Tolerances) -> Result<CheckReport, CheckError> {
    timed(|| v_polyhedron(a, p, tol, TimeRegime::Continuous))
}

fn v_polyhedron(a: &Matrix, p: &VPolyhedron, tol: &Tolerances, time: TimeRegime) -> Result<CheckReport, CheckError> {
    let set = v_set(p);
    let n = set.dim();
    square_dim(a, n)?;
    let name = match time {
        TimeRegime::Discrete => "discrete_v_polyhedron",
        TimeRegime::Continuous => "continuous_v_polyhedron",
    };
    let mut report = CheckReport::new(name, tol);
    let (l1, l2) = (p.vertices.len(), p.rays.len());
    let cols = generators(p);
    let total = l1 + l2;
    let mut lmat = Matrix::zeros(total, total);
    let mut unresolved = Vec::new();
    for (j, gen) in cols.iter().enumerate() {
        let target = a.mul_vec(gen);
        let is_vertex = j < l1;
        // Ray images never use vertex weights, so those columns are left out.
        let (offset, use_cols) = if is_vertex { (0, &cols[..]) } else { (l1, &cols[l1..]) };
        let mut signs = vec![VarSign::Nonnegative; use_cols.len()];
        let mut sums = Vec::new();
        match time {
            TimeRegime::Discrete => {
                if is_vertex {
                    sums.push((0..l1, 1.0));
                }
            }
            TimeRegime::Continuous => {
                signs[j - offset] = VarSign::Free;
                if is_vertex {
                    sums.push((0..l1, 0.0));
                }
            }
        }
        match combination(use_cols, &target, &signs, &sums, tol)? {
            Some(w) => {
                for (k, v) in w.into_iter().enumerate() {
                    lmat[(k + offset, j)] = v;
                }
            }
            None => {
                let witness = match time {
                    TimeRegime::Discrete => discrete_v_witness(a, &set, p, j, tol)?,
                    TimeRegime::Continuous => continuous_v_witness(a, &set, p, j, tol)?,
                };
                match witness {
                    Some(w) => {
                        report.verdict = Verdict::NotInvariant;
                        let what = if is_vertex { "vertex" } else { "ray" };
                        refute(&mut report, Some(j), Some(format!("image of {what} {j} not representable")), Some(w));
                        return Ok(report);
                    }
                    None => unresolved.push(j),
                }
            }
        }
    }
    if !unresolved.is_empty() {
        report.diag("infeasible_columns_without_witness", &unresolved);
        refute(&mut report, unresolved.first().copied(), Some("subproblem infeasible within tolerance".into()), None);
        return Ok(report);
    }
    let cert = match time {
        TimeRegime::Discrete => Certificate::VRepMatrix { l: lmat },
        TimeRegime::Continuous => Certificate::OdNonnegMatrix { representation: Representation::V, matrix: lmat },
    };
    finish_with_certificate(&mut report, cert, a, time, &set, tol)?;
    Ok(report)
}

fn ray_candidates(p: &VPolyhedron, j: usize) -> Vec<Vec<f64>> {
    let l1 = p.vertices.len();
    let ray = &p.rays[j - l1];
    let base = p.vertices.first().cloned().unwrap_or_else(|| vec![0.0; ray.len()]);
    [1.0, 10.0, 100.0, 1e3, 1e4, 1e6]
        .iter()
        .map(|t| base.iter().zip(ray).map(|(b, r)| b + t * r).collect())
        .collect()
}

fn discrete_v_witness(
    a: &Matrix,
    set: &SetDescription,
    p: &VPolyhedron,
    j: usize,
    tol: &Tolerances,
) -> Result<Option<Witness>, CheckError> {
    let candidates = if j < p.vertices.len() { vec![p.vertices[j].clone()] } else { ray_candidates(p, j) };
    for x in candidates {
        if let Some(w) = confirm_discrete(a, set, &x, tol)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

fn continuous_v_witness(
    a: &Matrix,
    set: &SetDescription,
    p: &VPolyhedron,
    j: usize,
    tol: &Tolerances,
) -> Result<Option<Witness>, CheckError> {
    let candidates = if j < p.vertices.len() { vec![p.vertices[j].clone()] } else { ray_candidates(p, j) };
    for x in candidates {
        if sets::membership(set, &x, tol.membership)?.classification != Classification::Boundary {
            continue;
        }
        let v = a.mul_vec(&x);
        if !sets::tangent_cone_contains(set, &x, &v, tol.membership)? {
            let rate = outward_rate(set, &x, &v)?;
            return Ok(Some(outward_witness(a, set, &x, rate, tol)?));
        }
    }
    Ok(None)
}

/// `dist(x + h v, S) / h` for a small `h`: the distance of `v` from the tangent cone.
fn outward_rate(set: &SetDescription, x: &[f64], v: &[f64]) -> Result<f64, CheckError> {
    let h = 1e-6 / norm2(v).max(1.0);
    let y: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + h * b).collect();
    Ok(sets::escape_margin(set, &y)? / h)
}

// ---------------------------------------------------------------------------
// Ellipsoids and quadratic sets
// ---------------------------------------------------------------------------

/// `μ_min = λ_1(W A^TQA W)` with `W² = Q^{-1}`, plus the top eigenvector mapped back by `W`.
pub fn ellipsoid_mu_min(a: &Matrix, e: &Ellipsoid, tol: &Tolerances) -> Result<(f64, Vec<f64>, Matrix), CheckError> {
    square_dim(a, e.q.rows())?;
    let w = e.inv_sqrt();
    let m = quad_form(a, &e.q);
    let wmw = (&(&w * &m) * &w).symmetric_part();
    let eig = numerics::sym_eig(&wmw, tol.eig)?;
    let x = w.mul_vec(&eig.eigenvector(0));
    Ok((eig.lambda_max(), x, wmw))
}

/// Smallest `μ ≥ 0` with `λ_1(A^TQA − μQ) ≤ 0`, found by bisection on the monotone minimand.
pub fn ellipsoid_mu_search(a: &Matrix, e: &Ellipsoid, tol: &Tolerances) -> Result<f64, CheckError> {
    square_dim(a, e.q.rows())?;
    let m = quad_form(a, &e.q);
    let f = |mu: f64| lmax(&m.sub(&e.q.scale(mu)), tol);
    if f(0.0)? <= 0.0 {
        return Ok(0.0);
    }
    let qmin = e.eig().lambda_min();
    let mut hi = (lmax(&m, tol)? / qmin).max(1.0) * 1.01;
    while f(hi)? > 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..SEARCH_MAX_ITER {
        if hi - lo <= tol.mu_search * 1e-3 * (1.0 + hi.abs()) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Discrete map on `{x^TQx ≤ 1}`: invariant iff `λ_1(W A^TQA W) ≤ 1`.
pub fn check_discrete_ellipsoid(a: &Matrix, e: &Ellipsoid, tol: &Tolerances) -> Result<CheckReport, CheckError> {
    timed(|| {
        let mut report = CheckReport::new("discrete_ellipsoid", tol);
        let (mu_min, x, wmw) = ellipsoid_mu_min(a, e, tol)?;
        let decide = classify_lambda_max(mu_min - 1.0, tol.psd * wmw.tol_scale());
        report.diag("mu_min", mu_min);
        let cross = numerics::definiteness(&quad_form(a, &e.q).sub(&e.q), tol.psd)?;
        report.diag("cross_check_lambda_max", cross.lambda_max);
        report.diag("cross_check", cross.class);
        let set = SetDescription::Ellipsoid(e.clone());
        apply_ellipsoid_decision(&mut report, decide.class, a, &set, &x, mu_min, tol)?;
        Ok(report)
    })
}

fn apply_ellipsoid_decision(
    report: &mut CheckReport,
    class: Definiteness,
    a: &Matrix,
    set: &SetDescription,
    x: &[f64],
    mu_min: f64,
    tol: &Tolerances,
) -> Result<(), CheckError> {
    match class {
        Definiteness::NegSemidefinite => {
            let cert = mu_certificate(a, set, mu_min.max(0.0), tol)?;
            finish_with_certificate(report, cert, a, TimeRegime::Discrete, set, tol)?;
        }
        Definiteness::NotNegSemidefinite => match confirm_discrete(a, set, x, tol)? {
            Some(w) => {
                report.verdict = Verdict::NotInvariant;
                refute(report, None, Some("mu_min > 1".into()), Some(w));
            }
            None => {
                report.verdict = Verdict::Inconclusive;
                report.diag("note", "witness did not leave the set beyond the membership tolerance");
            }
        },
        Definiteness::Marginal => report.verdict = Verdict::Inconclusive,
    }
    Ok(())
}

fn set_q(set: &SetDescription) -> Option<&Matrix> {
    match set {
        SetDescription::Ellipsoid(e) => Some(&e.q),
        SetDescription::Quadratic(s) => Some(&s.q),
        SetDescription::LorenzCone(c) => Some(&c.q),
        SetDescription::DoubleCone(d) => Some(&d.cone.q),
        _ => None,
    }
}

fn mu_certificate(a: &Matrix, set: &SetDescription, mu: f64, tol: &Tolerances) -> Result<Certificate, CheckError> {
    let q = set_q(set).expect("quadratic set");
    let lambda_max = lmax(&quad_form(a, q).sub(&q.scale(mu)), tol)?;
    Ok(Certificate::ScalarLmi { parameter: ScalarKind::Mu, value: mu, lambda_max, side_conditions: BTreeMap::new() })
}

/// The μ-free variant: `A^TQA − Q ⪯ 0`.
pub fn check_discrete_ellipsoid_mu_free(a: &Matrix, e: &Ellipsoid, tol: &Tolerances) -> Result<CheckReport, CheckError> {
    timed(|| {
        square_dim(a, e.q.rows())?;
        let mut report = CheckReport::new("discrete_ellipsoid_mu_free", tol);
        let m = quad_form(a, &e.q).sub(&e.q);
        let eig = numerics::sym_eig(&m, tol.eig)?;
        let d = classify_lambda_max(eig.lambda_max(), tol.psd * m.tol_scale());
        report.diag("lambda_max", d.lambda_max);
        let v = eig.eigenvector(0);
        let x: Vec<f64> = v.iter().map(|c| c / e.q.bilinear(&v, &v).sqrt()).collect();
        let set = SetDescription::Ellipsoid(e.clone());
        apply_ellipsoid_decision(&mut report, d.class, a, &set, &x, 1.0, tol)?;
        if let Certificate::ScalarLmi { value, .. } = &mut report.certificate {
            *value = 1.0;
        }
        Ok(report)
    })
}

/// Definiteness of `[[Q^{-1}, A], [A^T, νQ]]` at one trial `ν`.
pub fn check_discrete_ellipsoid_schur(a: &Matrix, e: &Ellipsoid, tol: &Tolerances) -> Result<CheckReport, CheckError> {
    timed(|| {
        let n = e.q.rows();
        let mut report = CheckReport::new("discrete_ellipsoid_schur", tol);
        let (mu_min, x, _) = ellipsoid_mu_min(a, e, tol)?;
        // Strictly above μ_min keeps the block nonsingular when μ_min < 1.
        let nu = if mu_min < 1.0 { 0.5 * (mu_min.max(0.0) + 1.0) } else { 1.0 };
        let qinv = e.inverse();
        let mut block = Matrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                block[(i, j)] = qinv[(i, j)];
                block[(i, n + j)] = a[(i, j)];
                block[(n + i, j)] = a[(j, i)];
                block[(n + i, n + j)] = nu * e.q[(i, j)];
            }
        }
        let d = numerics::definiteness(&block.scale(-1.0).symmetric_part(), tol.psd)?;
        report.diag("nu", nu);
        report.diag("block_lambda_min", -d.lambda_max);
        let set = SetDescription::Ellipsoid(e.clone());
        apply_ellipsoid_decision(&mut report, d.class, a, &set, &x, nu, tol)?;
        Ok(report)
    })
}

/// Ternary search for the minimum of a convex function on `[lo, hi]`; the
/// endpoints are always candidates so exact boundary optima are kept.
fn ternary_min(
    f: &dyn Fn(f64) -> Result<f64, CheckError>,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, f64), CheckError> {
    let (mut a, mut b) = (lo, hi);
    for _ in 0..SEARCH_MAX_ITER {
        if b - a <= tol * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if f(m1)? <= f(m2)? {
            b = m2;
        } else {
            a = m1;
        }
    }
    let mut best = (lo, f(lo)?);
    for t in [hi, 0.5 * (a + b)] {
        let v = f(t)?;
        if v < best.1 {
            best = (t, v);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LmiSearch {
    pub interval: ScalarInterval,
    /// The interval is empty beyond the relaxation band: no feasible scalar.
    pub infeasible: bool,
    pub argmin: f64,
    pub min_lambda: f64,
    pub band: f64,
    pub class: Definiteness,
    pub fallback: bool,
}

/// Minimizes `λ_1(M0 − tQ)` over the necessity interval.
fn lmi_search(m0: &Matrix, q: &Matrix, interval: ScalarInterval, tol: &Tolerances) -> Result<LmiSearch, CheckError> {
    let f = |t: f64| lmax(&m0.sub(&q.scale(t)), tol);
    let mut fallback = false;
    let (lo, hi) = if interval.lo.is_finite() && interval.hi.is_finite() {
        (interval.lo, interval.hi)
    } else {
        fallback = true;
        let qmin = numerics::sym_eig(q, tol.eig)?.eigenvalues.iter().fold(f64::INFINITY, |m, l| m.min(l.abs()));
        (0.0, 1.0 + m0.frobenius_norm() / qmin)
    };
    let delta = tol.psd * (1.0 + lo.abs() + hi.abs());
    let (argmin, min_lambda) = if lo <= hi {
        ternary_min(&f, lo, hi, tol.mu_search)?
    } else if lo - hi <= delta {
        let t = 0.5 * (lo + hi);
        (t, f(t)?)
    } else {
        return Ok(LmiSearch {
            interval,
            infeasible: true,
            argmin: f64::NAN,
            min_lambda: f64::NAN,
            band: delta,
            class: Definiteness::NotNegSemidefinite,
            fallback,
        });
    };
    let band = tol.psd * m0.sub(&q.scale(argmin)).tol_scale();
    let class = classify_lambda_max(min_lambda, band).class;
    Ok(LmiSearch { interval, infeasible: false, argmin, min_lambda, band, class, fallback })
}

/// Discrete map on `{x^TQx ≤ 1}` with `Q` symmetric: `∃ μ ∈ [0,1]`, `A^TQA − μQ ⪯ 0`.
pub fn check_discrete_quadratic(
    a: &Matrix,
    s: &QuadraticSet,
    tol: &Tolerances,
    seed: u64,
) -> Result<CheckReport, CheckError> {
    timed(|| {
        square_dim(a, s.q.rows())?;
        let mut report = CheckReport::new("discrete_quadratic", tol);
        let m = quad_form(a, &s.q);
        let search = lmi_search(&m, &s.q, ScalarInterval::new(0.0, 1.0), tol)?;
        report.diag("lmi_search", &search);
        let set = SetDescription::Quadratic(s.clone());
        match search.class {
            Definiteness::NegSemidefinite => {
                let cert = mu_certificate(a, &set, search.argmin, tol)?;
                finish_with_certificate(&mut report, cert, a, TimeRegime::Discrete, &set, tol)?;
            }
            Definiteness::NotNegSemidefinite => {
                report.verdict = Verdict::NotInvariant;
                let w = sampled_escape(a, &set, &[], tol, seed)?;
                refute(&mut report, None, Some("no mu in [0,1] makes the LMI negative semidefinite".into()), w);
            }
            Definiteness::Marginal => report.verdict = Verdict::Inconclusive,
        }
        Ok(report)
    })
}

/// Best-effort discrete escape among special, boundary, interior and scaled random points.
fn sampled_escape(
    a: &Matrix,
    set: &SetDescription,
    special: &[Vec<f64>],
    tol: &Tolerances,
    seed: u64,
) -> Result<Option<Witness>, CheckError> {
    let budget = tol.witness_budget.max(1);
    let mut candidates: Vec<Vec<f64>> = special.to_vec();
    if let Ok(b) = sets::sample_boundary(set, budget, seed) {
        candidates.extend(b.points);
    }
    if let Ok(i) = sets::sample_interior(set, budget, seed) {
        candidates.extend(i);
    }
    if let SetDescription::Quadratic(_) = set {
        candidates.extend(scaled_gaussians(set.dim(), budget, seed));
    }
    for x in candidates {
        if sets::membership(set, &x, tol.membership)?.classification == Classification::Outside {
            continue;
        }
        let y = a.mul_vec(&x);
        let margin = sets::escape_margin(set, &y)?;
        if margin > tol.membership {
            return Ok(Some(Witness { kind: WitnessKind::Exit, point: x, step: Some(1), time: Some(1.0), margin }));
        }
    }
    Ok(None)
}

fn scaled_gaussians(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5151);
    (0..count)
        .map(|k| {
            let r = [0.5, 1.0, 2.0, 4.0, 8.0][k % 5];
            (0..n).map(|_| r * rng.sample::<f64, _>(rand_distr::StandardNormal)).collect()
        })
        .collect()
}

/// Best-effort Nagumo violation among boundary samples of a cone.
fn sampled_outflow(
    a: &Matrix,
    set: &SetDescription,
    special: &[Vec<f64>],
    tol: &Tolerances,
    seed: u64,
) -> Result<Option<Witness>, CheckError> {
    let mut candidates: Vec<Vec<f64>> = special.to_vec();
    if let Ok(b) = sets::sample_boundary(set, tol.witness_budget.max(1), seed) {
        candidates.extend(b.points);
    }
    for x in candidates {
        if sets::membership(set, &x, tol.membership)?.classification != Classification::Boundary {
            continue;
        }
        let v = a.mul_vec(&x);
        if !sets::tangent_cone_contains(set, &x, &v, tol.membership)? {
            let rate = outward_rate(set, &x, &v)?;
            return Ok(Some(outward_witness(a, set, &x, rate, tol)?));
        }
    }
    Ok(None)
}

/// Continuous flow on `{x^TQx ≤ 1}`: `A^TQ + QA ⪯ 0`.
pub fn check_continuous_ellipsoid(a: &Matrix, e: &Ellipsoid, tol: &Tolerances) -> Result<CheckReport, CheckError> {
    timed(|| {
        square_dim(a, e.q.rows())?;
        let mut report = CheckReport::new("continuous_ellipsoid", tol);
        let m = lyapunov(a, &e.q);
        let eig = numerics::sym_eig(&m, tol.eig)?;
        let d = classify_lambda_max(eig.lambda_max(), tol.psd * m.tol_scale());
        report.diag("lambda_max", d.lambda_max);
        report.diag("band", d.band);
        let set = SetDescription::Ellipsoid(e.clone());
        match d.class {
            Definiteness::NegSemidefinite => {
                let cert = Certificate::ScalarLmi {
                    parameter: ScalarKind::Eta,
                    value: 0.0,
                    lambda_max: d.lambda_max,
                    side_conditions: BTreeMap::new(),
                };
                finish_with_certificate(&mut report, cert, a, TimeRegime::Continuous, &set, tol)?;
            }
            Definiteness::NotNegSemidefinite => {
                let v = eig.eigenvector(0);
                let x: Vec<f64> = v.iter().map(|c| c / e.q.bilinear(&v, &v).sqrt()).collect();
                let ax = a.mul_vec(&x);
                let qx = e.q.mul_vec(&x);
                let rate = dot(&ax, &qx) / (norm2(&ax) * norm2(&qx)).max(1.0);
                report.diag("outward_rate", rate);
                report.verdict = Verdict::NotInvariant;
                let w = outward_witness(a, &set, &x, rate, tol)?;
                refute(&mut report, None, Some("A^TQ + QA has a positive eigenvalue".into()), Some(w));
            }
            Definiteness::Marginal => report.verdict = Verdict::Inconclusive,
        }
        Ok(report)
    })
}

// ---------------------------------------------------------------------------
// Cones
// ---------------------------------------------------------------------------

/// Necessity bounds on `μ` from the eigenvectors of `Q`.
pub fn mu_interval(a: &Matrix, c: &LorenzCone, mode: IntervalMode) -> Result<ScalarInterval, CheckError> {
    let n = c.dim();
    square_dim(a, n)?;
    let m = quad_form(a, &c.q);
    let un = c.eigenvector(n - 1);
    let hi = m.bilinear(&un, &un) / c.lambda(n - 1);
    let lo = match mode {
        IntervalMode::Simple => 0.0,
        IntervalMode::Full => (0..n - 1).fold(0.0f64, |acc, i| {
            let u = c.eigenvector(i);
            acc.max(m.bilinear(&u, &u) / c.lambda(i))
        }),
    };
    Ok(snapped(lo, hi))
}

/// Bounds computed from a numerical eigenbasis: a crossing within roundoff
/// collapses to a single point, so `[1, 1]` is not reported empty.
fn snapped(lo: f64, hi: f64) -> ScalarInterval {
    let pad = INTERVAL_ROUNDOFF * (1.0 + lo.abs().max(hi.abs()));
    if lo > hi && lo - hi <= pad {
        let mid = 0.5 * (lo + hi);
        return ScalarInterval::new(mid, mid);
    }
    ScalarInterval::new(lo, hi)
}

/// Necessity bounds on `η`: `max_{i<n} u_i^T(A^T+A)u_i ≤ η ≤ u_n^T(A^T+A)u_n`.
pub fn eta_interval(a: &Matrix, c: &LorenzCone) -> Result<ScalarInterval, CheckError> {
    let n = c.dim();
    square_dim(a, n)?;
    let s = a.add(&a.transpose());
    let un = c.eigenvector(n - 1);
    let hi = s.bilinear(&un, &un);
    let lo = (0..n - 1).fold(f64::NEG_INFINITY, |acc, i| {
        let u = c.eigenvector(i);
        acc.max(s.bilinear(&u, &u))
    });
    Ok(snapped(lo, hi))
}

fn cone_specials(c: &LorenzCone) -> Vec<Vec<f64>> {
    let n = c.dim();
    let t = c.transform();
    let mut out = vec![c.axis().to_vec()];
    for i in 0..n - 1 {
        for s in [1.0, -1.0] {
            let mut z = vec![0.0; n];
            z[i] = s;
            z[n - 1] = 1.0;
            out.push(t.mul_vec(&z));
        }
    }
    out
}

/// Discrete map on the nonconvex `C ∪ (−C)`: `∃ μ ≥ 0`, `A^TQA − μQ ⪯ 0`.
pub fn check_discrete_double_cone(
    a: &Matrix,
    d: &DoubleCone,
    tol: &Tolerances,
    seed: u64,
) -> Result<CheckReport, CheckError> {
    timed(|| {
        let c = &d.cone;
        let mut report = CheckReport::new("discrete_double_cone", tol);
        let interval = mu_interval(a, c, IntervalMode::Full)?;
        report.diag("mu_interval_full", interval);
        let search = lmi_search(&quad_form(a, &c.q), &c.q, interval, tol)?;
        report.diag("lmi_search", &search);
        let set = SetDescription::DoubleCone(d.clone());
        match search.class {
            Definiteness::NegSemidefinite => {
                let cert = mu_certificate(a, &set, search.argmin, tol)?;
                finish_with_certificate(&mut report, cert, a, TimeRegime::Discrete, &set, tol)?;
            }
            Definiteness::NotNegSemidefinite => {
                report.verdict = Verdict::NotInvariant;
                let why = if search.infeasible { "mu interval is empty" } else { "LMI has no feasible mu" };
                let w = sampled_escape(a, &set, &cone_specials(c), tol, seed)?;
                refute(&mut report, None, Some(why.into()), w);
            }
            Definiteness::Marginal => report.verdict = Verdict::Inconclusive,
        }
        Ok(report)
    })
}

fn side_scalars(a: &Matrix, c: &LorenzCone) -> (f64, f64) {
    let un = c.axis();
    let s1 = a.bilinear(un, un);
    let atu = a.tr_mul_vec(un);
    let s2 = c.q_inverse().bilinear(&atu, &atu);
    (s1, s2)
}

/// Discrete map on a Lorenz cone: the shared LMI plus `u_n^TAu_n ≥ 0` and `u_n^TAQ^{-1}A^Tu_n ≤ 0`.
pub fn check_discrete_lorenz(a: &Matrix, c: &LorenzCone, tol: &Tolerances, seed: u64) -> Result<CheckReport, CheckError> {
    timed(|| {
        let mut report = CheckReport::new("discrete_lorenz", tol);
        let full = mu_interval(a, c, IntervalMode::Full)?;
        report.diag("mu_interval_full", full);
        report.diag("mu_interval_simple", mu_interval(a, c, IntervalMode::Simple)?);
        let search = lmi_search(&quad_form(a, &c.q), &c.q, full, tol)?;
        report.diag("lmi_search", &search);
        let (s1, s2) = side_scalars(a, c);
        let band1 = tol.psd * a.tol_scale();
        let band2 = tol.psd * (1.0 + a.frobenius_norm().powi(2) * c.q_inverse().frobenius_norm());
        let axis_class = classify_lambda_max(-s1, band1).class;
        let dual_class = classify_lambda_max(s2, band2).class;
        report.diag("axis_image", s1);
        report.diag("dual_halfspace_scalar", s2);
        report.diag("geometry", classify_mu_geometry(a, c, tol)?);
        if let Some(suff) = check_discrete_lorenz_sufficient(a, c, tol)? {
            report.diag("sufficient_condition", suff.verdict);
        }
        let classes = [("lmi", search.class), ("axis", axis_class), ("dual_halfspace", dual_class)];
        let failed: Vec<&str> =
            classes.iter().filter(|(_, k)| *k == Definiteness::NotNegSemidefinite).map(|(n, _)| *n).collect();
        let set = SetDescription::LorenzCone(c.clone());
        if !failed.is_empty() {
            report.verdict = Verdict::NotInvariant;
            let w = sampled_escape(a, &set, &cone_specials(c), tol, seed)?;
            refute(&mut report, None, Some(failed.join(",")), w);
        } else if classes.iter().any(|(_, k)| *k == Definiteness::Marginal) {
            report.verdict = Verdict::Inconclusive;
        } else {
            let mut cert = mu_certificate(a, &set, search.argmin, tol)?;
            if let Certificate::ScalarLmi { side_conditions, .. } = &mut cert {
                side_conditions.insert("axis_image".into(), s1);
                side_conditions.insert("dual_halfspace".into(), s2);
            }
            finish_with_certificate(&mut report, cert, a, TimeRegime::Discrete, &set, tol)?;
        }
        Ok(report)
    })
}

/// `λ_1(A^TQA) ≤ 0` suffices; `None` when the condition does not apply.
pub fn check_discrete_lorenz_sufficient(
    a: &Matrix,
    c: &LorenzCone,
    tol: &Tolerances,
) -> Result<Option<CheckReport>, CheckError> {
    square_dim(a, c.dim())?;
    let m = quad_form(a, &c.q);
    let l = lmax(&m, tol)?;
    if l > -tol.psd * m.tol_scale() {
        return Ok(None);
    }
    let mut report = CheckReport::new("discrete_lorenz_sufficient", tol);
    let set = SetDescription::LorenzCone(c.clone());
    finish_with_certificate(&mut report, Certificate::SufficientOnly { lambda_max: l }, a, TimeRegime::Discrete, &set, tol)?;
    Ok(Some(report))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageClass {
    Interior,
    Boundary,
    Exterior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MuConclusion {
    NoMu,
    MuZero,
    MuInInterval,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MuGeometry {
    /// `(A u_i)^T Q (A u_i)` for each eigenvector.
    pub image_values: Vec<f64>,
    pub image_classes: Vec<ImageClass>,
    pub interval_full: ScalarInterval,
    pub interval_simple: ScalarInterval,
    pub conclusion: MuConclusion,
}

/// Where each `A u_i` lands relative to `C ∪ (−C)` and what that implies for `μ`.
pub fn classify_mu_geometry(a: &Matrix, c: &LorenzCone, tol: &Tolerances) -> Result<MuGeometry, CheckError> {
    let n = c.dim();
    square_dim(a, n)?;
    let mut values = Vec::with_capacity(n);
    let mut classes = Vec::with_capacity(n);
    for i in 0..n {
        let y = a.mul_vec(&c.eigenvector(i));
        let v = c.q.bilinear(&y, &y);
        let band = tol.psd * (1.0 + c.q.frobenius_norm() * dot(&y, &y));
        classes.push(if v < -band {
            ImageClass::Interior
        } else if v <= band {
            ImageClass::Boundary
        } else {
            ImageClass::Exterior
        });
        values.push(v);
    }
    let full = mu_interval(a, c, IntervalMode::Full)?;
    let simple = mu_interval(a, c, IntervalMode::Simple)?;
    let conclusion = if full.empty || classes[n - 1] == ImageClass::Exterior {
        MuConclusion::NoMu
    } else if classes[n - 1] == ImageClass::Boundary && classes[..n - 1].iter().all(|k| *k != ImageClass::Exterior) {
        MuConclusion::MuZero
    } else if classes[n - 1] == ImageClass::Interior {
        MuConclusion::MuInInterval
    } else {
        MuConclusion::Undetermined
    };
    Ok(MuGeometry { image_values: values, image_classes: classes, interval_full: full, interval_simple: simple, conclusion })
}

/// Continuous flow on `C ∪ (−C)`: `∃ η`, `A^TQ + QA − ηQ ⪯ 0`.
pub fn check_continuous_double_cone(
    a: &Matrix,
    d: &DoubleCone,
    tol: &Tolerances,
    seed: u64,
) -> Result<CheckReport, CheckError> {
    timed(|| continuous_cone(a, &d.cone, SetDescription::DoubleCone(d.clone()), "continuous_double_cone", tol, seed))
}

/// Continuous flow on a Lorenz cone. Trajectories cannot pass from `C` to
/// `−C` without crossing the origin, an equilibrium, so the double-cone
/// test decides this case too.
pub fn check_continuous_lorenz(a: &Matrix, c: &LorenzCone, tol: &Tolerances, seed: u64) -> Result<CheckReport, CheckError> {
    timed(|| {
        let mut r = continuous_cone(a, c, SetDescription::LorenzCone(c.clone()), "continuous_lorenz", tol, seed)?;
        r.diag("origin_equilibrium", "single-cone verdict follows the double-cone LMI");
        Ok(r)
    })
}

fn continuous_cone(
    a: &Matrix,
    c: &LorenzCone,
    set: SetDescription,
    name: &str,
    tol: &Tolerances,
    seed: u64,
) -> Result<CheckReport, CheckError> {
    let mut report = CheckReport::new(name, tol);
    let interval = eta_interval(a, c)?;
    report.diag("eta_interval", interval);
    let m = lyapunov(a, &c.q);
    let search = lmi_search(&m, &c.q, interval, tol)?;
    report.diag("lmi_search", &search);
    match search.class {
        Definiteness::NegSemidefinite => {
            let eta = max_feasible_eta(&m, &c.q, search.argmin, interval.hi.max(search.argmin), tol)?;
            report.diag("eta_star_sign", if eta >= 0.0 { "nonnegative" } else { "negative" });
            let lambda_max = lmax(&m.sub(&c.q.scale(eta)), tol)?;
            let cert =
                Certificate::ScalarLmi { parameter: ScalarKind::Eta, value: eta, lambda_max, side_conditions: BTreeMap::new() };
            finish_with_certificate(&mut report, cert, a, TimeRegime::Continuous, &set, tol)?;
        }
        Definiteness::NotNegSemidefinite => {
            report.verdict = Verdict::NotInvariant;
            let why = if search.infeasible { "eta interval is empty" } else { "LMI has no feasible eta" };
            let w = sampled_outflow(a, &set, &cone_specials(c), tol, seed)?;
            refute(&mut report, None, Some(why.into()), w);
        }
        Definiteness::Marginal => report.verdict = Verdict::Inconclusive,
    }
    Ok(report)
}

fn verify_band(psd: f64, m: &Matrix) -> f64 {
    (psd + VERIFY_FLOOR) * m.tol_scale()
}

/// Largest `η ∈ [lo, hi]` whose LMI passes certificate verification; `lo` must pass.
fn max_feasible_eta(m: &Matrix, q: &Matrix, lo: f64, hi: f64, tol: &Tolerances) -> Result<f64, CheckError> {
    let feasible = |eta: f64| -> Result<bool, CheckError> {
        let mm = m.sub(&q.scale(eta));
        Ok(lmax(&mm, tol)? <= verify_band(tol.psd, &mm))
    };
    if feasible(hi)? {
        return Ok(hi);
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..SEARCH_MAX_ITER {
        if b - a <= tol.mu_search * (1.0 + b.abs()) {
            break;
        }
        let mid = 0.5 * (a + b);
        if feasible(mid)? {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfspaceOrientation {
    /// `u_n^T A x ≥ 0` on the cone.
    Cone,
    /// `u_n^T A x ≤ 0` on the cone, i.e. the condition holds for `−C`.
    NegatedCone,
    /// `u_n^T A x = 0` on the cone.
    Both,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualHalfspace {
    pub scalar: f64,
    pub scalar_holds: bool,
    pub orientation: HalfspaceOrientation,
    pub min_sampled: f64,
    pub max_sampled: f64,
    pub violating_sample: Option<Vec<f64>>,
    /// The scalar test agrees with the sampled test.
    pub consistent: bool,
}

/// `u_n^TAQ^{-1}A^Tu_n ≤ 0` against sampled values of `u_n^T A x` over the cone.
pub fn check_dual_halfspace(
    a: &Matrix,
    c: &LorenzCone,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<DualHalfspace, CheckError> {
    square_dim(a, c.dim())?;
    let (_, scalar) = side_scalars(a, c);
    let band = tol.psd * (1.0 + a.frobenius_norm().powi(2) * c.q_inverse().frobenius_norm());
    let set = SetDescription::LorenzCone(c.clone());
    let mut pts = cone_specials(c);
    pts.extend(sets::sample_boundary(&set, samples.max(1), seed)?.points);
    pts.extend(sets::sample_interior(&set, samples.max(1), seed)?);
    let un = c.axis();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut lo_pt, mut hi_pt) = (None, None);
    let vtol = tol.membership * (1.0 + a.frobenius_norm());
    for x in pts {
        let s = norm2(&x);
        if s == 0.0 {
            continue;
        }
        let v = dot(un, &a.mul_vec(&x)) / s;
        if v < lo {
            lo = v;
            lo_pt = Some(x.clone());
        }
        if v > hi {
            hi = v;
            hi_pt = Some(x);
        }
    }
    let nonneg = lo >= -vtol;
    let nonpos = hi <= vtol;
    let orientation = match (nonneg, nonpos) {
        (true, true) => HalfspaceOrientation::Both,
        (true, false) => HalfspaceOrientation::Cone,
        (false, true) => HalfspaceOrientation::NegatedCone,
        (false, false) => HalfspaceOrientation::Neither,
    };
    let violating_sample = match orientation {
        HalfspaceOrientation::Cone | HalfspaceOrientation::Both => None,
        HalfspaceOrientation::NegatedCone => lo_pt,
        HalfspaceOrientation::Neither => lo_pt.or(hi_pt),
    };
    let scalar_holds = scalar <= band;
    let consistent = scalar_holds == (orientation != HalfspaceOrientation::Neither);
    Ok(DualHalfspace { scalar, scalar_holds, orientation, min_sampled: lo, max_sampled: hi, violating_sample, consistent })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryFlow {
    pub preserved: bool,
    /// `‖Q̃_{k-1}‖_max` for `k = 2, …, K`.
    pub residuals: Vec<f64>,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Whether trajectories starting on `{x^TQx = c}` stay on it: every
/// `Q̃_{k-1} = Σ_i (A^i)^T Q A^{k-1-i} / (i!(k-1-i)!)` must vanish.
pub fn check_boundary_flow(a: &Matrix, q: &Matrix, k_max: usize, tol: f64) -> Result<BoundaryFlow, CheckError> {
    if k_max < 2 {
        return Err(CheckError::Unsupported("boundary flow needs K >= 2".into()));
    }
    square_dim(a, q.rows())?;
    let n = a.rows();
    let mut powers = vec![Matrix::identity(n)];
    for i in 1..k_max {
        powers.push(&powers[i - 1] * a);
    }
    let mut residuals = Vec::with_capacity(k_max - 1);
    let mut preserved = true;
    for k in 2..=k_max {
        let mut sum = Matrix::zeros(n, n);
        let mut scale = 0.0;
        for i in 0..k {
            let term = (&powers[i].transpose() * q) * &powers[k - 1 - i];
            let term = term.scale(1.0 / (factorial(i) * factorial(k - 1 - i)));
            scale += term.max_abs();
            sum = sum.add(&term);
        }
        if !sum.is_finite() {
            return Err(NumericsError::Overflow { norm: f64::INFINITY }.into());
        }
        let r = sum.max_abs();
        if r > tol * (1.0 + scale) {
            preserved = false;
        }
        residuals.push(r);
    }
    Ok(BoundaryFlow { preserved, residuals })
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

impl Certificate {
    /// Re-verifies the certificate by direct substitution.
    pub fn verify(
        &self,
        a: &Matrix,
        time: TimeRegime,
        set: &SetDescription,
        tol: &Tolerances,
    ) -> Result<VerifyOutcome, CheckError> {
        square_dim(a, set.dim())?;
        let lt = tol.lp;
        match (self, set) {
            (Certificate::NonnegMatrix { h }, SetDescription::HPolyhedron(p) | SetDescription::HCone(p)) => {
                if time != TimeRegime::Discrete {
                    return Ok(VerifyOutcome::new(vec!["nonnegative H certifies discrete systems".into()], f64::NAN));
                }
                let mut bad = Vec::new();
                let (res, hb) = h_residuals(h, p, a, &mut bad)?;
                if h.as_slice().iter().any(|&v| v < -lt) {
                    bad.push("H has a negative entry".into());
                }
                if res > lt {
                    bad.push(format!("||HG - GA||_max = {res:.3e}"));
                }
                let slack = hb.iter().zip(&p.b).map(|(x, b)| x - b).fold(f64::NEG_INFINITY, f64::max);
                if slack > lt {
                    bad.push(format!("Hb exceeds b by {slack:.3e}"));
                }
                Ok(VerifyOutcome::new(bad, res))
            }
            (
                Certificate::OdNonnegMatrix { representation: Representation::H, matrix: h },
                SetDescription::HPolyhedron(p) | SetDescription::HCone(p),
            ) => {
                if time != TimeRegime::Continuous {
                    return Ok(VerifyOutcome::new(vec!["H̃ certifies continuous systems".into()], f64::NAN));
                }
                let mut bad = Vec::new();
                let (res, hb) = h_residuals(h, p, a, &mut bad)?;
                if off_diagonal_min(h) < -lt {
                    bad.push("H̃ has a negative off-diagonal entry".into());
                }
                if res > lt {
                    bad.push(format!("||H̃G - GA||_max = {res:.3e}"));
                }
                let worst = hb.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if worst > lt {
                    bad.push(format!("H̃b has a positive entry {worst:.3e}"));
                }
                Ok(VerifyOutcome::new(bad, res))
            }
            (Certificate::VRepMatrix { l }, SetDescription::VPolyhedron(p) | SetDescription::VCone(p)) => {
                if time != TimeRegime::Discrete {
                    return Ok(VerifyOutcome::new(vec!["L certifies discrete systems".into()], f64::NAN));
                }
                let mut bad = Vec::new();
                let res = v_residual(l, p, a, &mut bad)?;
                if l.as_slice().iter().any(|&v| v < -lt) {
                    bad.push("L has a negative entry".into());
                }
                v_column_sums(l, p, 1.0, lt, &mut bad);
                if res > lt {
                    bad.push(format!("||XL - AX||_max = {res:.3e}"));
                }
                Ok(VerifyOutcome::new(bad, res))
            }
            (
                Certificate::OdNonnegMatrix { representation: Representation::V, matrix: l },
                SetDescription::VPolyhedron(p) | SetDescription::VCone(p),
            ) => {
                if time != TimeRegime::Continuous {
                    return Ok(VerifyOutcome::new(vec!["L̃ certifies continuous systems".into()], f64::NAN));
                }
                let mut bad = Vec::new();
                let res = v_residual(l, p, a, &mut bad)?;
                if off_diagonal_min(l) < -lt {
                    bad.push("L̃ has a negative off-diagonal entry".into());
                }
                v_column_sums(l, p, 0.0, lt, &mut bad);
                if res > lt {
                    bad.push(format!("||XL̃ - AX||_max = {res:.3e}"));
                }
                Ok(VerifyOutcome::new(bad, res))
            }
            (Certificate::ScalarLmi { parameter, value, .. }, _) => verify_scalar(*parameter, *value, a, time, set, tol),
            (Certificate::SufficientOnly { .. }, SetDescription::LorenzCone(c)) => {
                let m = quad_form(a, &c.q);
                let l = lmax(&m, tol)?;
                let mut bad = Vec::new();
                if time != TimeRegime::Discrete {
                    bad.push("the sufficient condition applies to discrete systems".into());
                }
                if l > verify_band(tol.psd, &m) {
                    bad.push(format!("lambda_1(A^TQA) = {l:.3e} > 0"));
                }
                Ok(VerifyOutcome::new(bad, l))
            }
            (Certificate::None, _) => Ok(VerifyOutcome::new(vec!["no certificate".into()], f64::NAN)),
            (cert, set) => Ok(VerifyOutcome::new(
                vec![format!("certificate {} does not apply to set {}", cert_kind(cert), set.kind())],
                f64::NAN,
            )),
        }
    }
}

fn cert_kind(c: &Certificate) -> &'static str {
    match c {
        Certificate::NonnegMatrix { .. } => "nonneg_matrix",
        Certificate::OdNonnegMatrix { .. } => "od_nonneg_matrix",
        Certificate::VRepMatrix { .. } => "v_rep_matrix",
        Certificate::ScalarLmi { .. } => "scalar_lmi",
        Certificate::SufficientOnly { .. } => "sufficient_only",
        Certificate::None => "none",
    }
}

fn off_diagonal_min(m: &Matrix) -> f64 {
    let mut out = f64::INFINITY;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if i != j {
                out = out.min(m[(i, j)]);
            }
        }
    }
    out
}

fn h_residuals(h: &Matrix, p: &HPolyhedron, a: &Matrix, bad: &mut Vec<String>) -> Result<(f64, Vec<f64>), CheckError> {
    let m = p.g.rows();
    if h.rows() != m || h.cols() != m {
        bad.push(format!("certificate is {}x{} but G has {m} rows", h.rows(), h.cols()));
        return Ok((f64::INFINITY, vec![f64::INFINITY; m]));
    }
    let res = h.matmul(&p.g)?.sub(&p.g.matmul(a)?).max_abs();
    Ok((res, h.mul_vec(&p.b)))
}

fn v_residual(l: &Matrix, p: &VPolyhedron, a: &Matrix, bad: &mut Vec<String>) -> Result<f64, CheckError> {
    let gens = generators(p);
    if l.rows() != gens.len() || l.cols() != gens.len() {
        bad.push(format!("certificate is {}x{} but there are {} generators", l.rows(), l.cols(), gens.len()));
        return Ok(f64::INFINITY);
    }
    let x = Matrix::from_columns(&gens)?;
    Ok(x.matmul(l)?.sub(&a.matmul(&x)?).max_abs())
}

/// Vertex-block column sums: `vertex_sum` on vertex columns, zero on ray columns.
fn v_column_sums(l: &Matrix, p: &VPolyhedron, vertex_sum: f64, lt: f64, bad: &mut Vec<String>) {
    let l1 = p.vertices.len();
    for j in 0..l.cols() {
        let s: f64 = (0..l1).map(|i| l[(i, j)]).sum();
        let want = if j < l1 { vertex_sum } else { 0.0 };
        if (s - want).abs() > lt {
            bad.push(format!("column {j} vertex weights sum to {s} instead of {want}"));
        }
        if j >= l1 && (0..l1).any(|i| l[(i, j)].abs() > lt) {
            bad.push(format!("ray column {j} uses vertex weights"));
        }
    }
}

fn verify_scalar(
    parameter: ScalarKind,
    value: f64,
    a: &Matrix,
    time: TimeRegime,
    set: &SetDescription,
    tol: &Tolerances,
) -> Result<VerifyOutcome, CheckError> {
    let mut bad = Vec::new();
    let Some(q) = set_q(set) else {
        return Ok(VerifyOutcome::new(vec![format!("scalar LMI does not apply to {}", set.kind())], f64::NAN));
    };
    if !value.is_finite() {
        bad.push("scalar is not finite".into());
        return Ok(VerifyOutcome::new(bad, f64::NAN));
    }
    let expected = match time {
        TimeRegime::Discrete => ScalarKind::Mu,
        TimeRegime::Continuous => ScalarKind::Eta,
    };
    if parameter != expected {
        bad.push(format!("{parameter:?} does not match the time regime"));
    }
    let base = match time {
        TimeRegime::Discrete => quad_form(a, q),
        TimeRegime::Continuous => lyapunov(a, q),
    };
    let m = base.sub(&q.scale(value));
    let l = lmax(&m, tol)?;
    if l > verify_band(tol.psd, &m) {
        bad.push(format!("lambda_1 of the LMI is {l:.3e}"));
    }
    let eps = tol.psd;
    match (time, set) {
        (TimeRegime::Discrete, SetDescription::Ellipsoid(_) | SetDescription::Quadratic(_)) => {
            if value < -eps || value > 1.0 + eps {
                bad.push(format!("mu = {value} outside [0, 1]"));
            }
        }
        (TimeRegime::Discrete, _) => {
            if value < -eps {
                bad.push(format!("mu = {value} is negative"));
            }
        }
        (TimeRegime::Continuous, SetDescription::Ellipsoid(_)) => {
            if value != 0.0 {
                bad.push("the ellipsoid condition has eta = 0".into());
            }
        }
        (TimeRegime::Continuous, SetDescription::Quadratic(_)) => {
            bad.push("no continuous certificate for general quadratic sets".into());
        }
        _ => {}
    }
    if let (TimeRegime::Discrete, SetDescription::LorenzCone(c)) = (time, set) {
        let (s1, s2) = side_scalars(a, c);
        if s1 < -eps * a.tol_scale() {
            bad.push(format!("u_n^T A u_n = {s1:.3e} < 0"));
        }
        if s2 > eps * (1.0 + a.frobenius_norm().powi(2) * c.q_inverse().frobenius_norm()) + VERIFY_FLOOR {
            bad.push(format!("u_n^T A Q^-1 A^T u_n = {s2:.3e} > 0"));
        }
    }
    Ok(VerifyOutcome::new(bad, l))
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

/// Runs the checker matching the problem's set type and time regime.
pub fn check(problem: &Problem) -> Result<CheckReport, CheckError> {
    let (a, tol, seed) = (&problem.a, &problem.tolerances, problem.seed);
    square_dim(a, problem.set.dim())?;
    use SetDescription as S;
    use TimeRegime::*;
    match (&problem.set, problem.time) {
        (S::HPolyhedron(p) | S::HCone(p), Discrete) => check_discrete_polyhedron(a, p, tol),
        (S::HPolyhedron(p) | S::HCone(p), Continuous) => check_continuous_polyhedron(a, p, tol),
        (S::VPolyhedron(p) | S::VCone(p), Discrete) => check_discrete_v_polyhedron(a, p, tol),
        (S::VPolyhedron(p) | S::VCone(p), Continuous) => check_continuous_v_polyhedron(a, p, tol),
        (S::Ellipsoid(e), Discrete) => check_discrete_ellipsoid(a, e, tol),
        (S::Ellipsoid(e), Continuous) => check_continuous_ellipsoid(a, e, tol),
        (S::Quadratic(s), Discrete) => check_discrete_quadratic(a, s, tol, seed),
        (S::Quadratic(_), Continuous) => {
            Err(CheckError::Unsupported("continuous systems on general quadratic sets".into()))
        }
        (S::DoubleCone(d), Discrete) => check_discrete_double_cone(a, d, tol, seed),
        (S::DoubleCone(d), Continuous) => check_continuous_double_cone(a, d, tol, seed),
        (S::LorenzCone(c), Discrete) => check_discrete_lorenz(a, c, tol, seed),
        (S::LorenzCone(c), Continuous) => check_continuous_lorenz(a, c, tol, seed),
    }
}

/// Interval and geometry diagnostics for cone problems; `None` for other sets.
pub fn diagnose(problem: &Problem) -> Result<Option<Value>, CheckError> {
    let a = &problem.a;
    let tol = &problem.tolerances;
    let cone = match &problem.set {
        SetDescription::LorenzCone(c) => c,
        SetDescription::DoubleCone(d) => &d.cone,
        _ => return Ok(None),
    };
    let mut out = json!({
        "mu_interval_full": mu_interval(a, cone, IntervalMode::Full)?,
        "mu_interval_simple": mu_interval(a, cone, IntervalMode::Simple)?,
        "eta_interval": eta_interval(a, cone)?,
        "geometry": classify_mu_geometry(a, cone, tol)?,
    });
    if let SetDescription::LorenzCone(c) = &problem.set {
        out["dual_halfspace"] = serde_json::to_value(check_dual_halfspace(a, c, 64, problem.seed, tol)?).unwrap_or(Value::Null);
        out["sufficient_condition_applies"] = json!(check_discrete_lorenz_sufficient(a, c, tol)?.is_some());
    }
    Ok(Some(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::SetSpec;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn exact() -> Tolerances {
        Tolerances::default().with_psd(0.0)
    }

    fn diamond() -> HPolyhedron {
        HPolyhedron { g: m(&[&[1.0, 1.0], &[-1.0, 1.0], &[1.0, -1.0], &[-1.0, -1.0]]), b: vec![1.0; 4] }
    }

    fn square_h() -> HPolyhedron {
        HPolyhedron { g: m(&[&[1.0, 0.0], &[-1.0, 0.0], &[0.0, 1.0], &[0.0, -1.0]]), b: vec![1.0; 4] }
    }

    fn cone(diag: &[f64]) -> LorenzCone {
        LorenzCone::new(Matrix::from_diag(diag)).unwrap()
    }

    fn std_cone() -> LorenzCone {
        cone(&[1.0, 1.0, -1.0])
    }

    fn disk() -> Ellipsoid {
        Ellipsoid::new(Matrix::identity(2)).unwrap()
    }

    fn rotation() -> Matrix {
        m(&[&[0.0, -1.0], &[1.0, 0.0]])
    }

    #[test]
    fn discrete_polyhedron_examples() {
        let r = check_discrete_polyhedron(&Matrix::identity(2).scale(-1.0), &diamond(), &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::Invariant);
        let Certificate::NonnegMatrix { h } = &r.certificate else { panic!() };
        let swap = m(&[&[0.0, 0.0, 0.0, 1.0], &[0.0, 0.0, 1.0, 0.0], &[0.0, 1.0, 0.0, 0.0], &[1.0, 0.0, 0.0, 0.0]]);
        assert_eq!(h, &swap);

        let r = check_discrete_polyhedron(&Matrix::from_diag(&[2.0, 0.0]), &square_h(), &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::NotInvariant);
        let w = r.witness().unwrap();
        assert_eq!(w.point[0], 1.0);
        assert_eq!(w.step, Some(1));

        let r = check_discrete_polyhedron(&Matrix::zeros(2, 2), &diamond(), &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::Invariant);
    }

    #[test]
    fn continuous_polyhedron_examples() {
        let r = check_continuous_polyhedron(&Matrix::identity(2).scale(-1.0), &diamond(), &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::Invariant);
        let half = HPolyhedron { g: m(&[&[1.0, 0.0]]), b: vec![1.0] };
        let r = check_continuous_polyhedron(&Matrix::identity(2), &half, &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::NotInvariant);
        assert_eq!(r.refutation.as_ref().unwrap().subproblem, Some(0));
        assert!((r.witness().unwrap().point[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn v_polyhedron_examples() {
        let seg = VPolyhedron { vertices: vec![vec![0.0], vec![1.0]], rays: vec![] };
        let r = check_continuous_v_polyhedron(&m(&[&[-1.0]]), &seg, &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::Invariant);
        let r = check_continuous_v_polyhedron(&m(&[&[1.0]]), &seg, &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::NotInvariant);
        assert_eq!(r.refutation.as_ref().unwrap().subproblem, Some(1));

        let sq = VPolyhedron {
            vertices: vec![vec![1.0, 1.0], vec![-1.0, 1.0], vec![1.0, -1.0], vec![-1.0, -1.0]],
            rays: vec![],
        };
        let r = check_discrete_v_polyhedron(&Matrix::identity(2).scale(0.5), &sq, &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::Invariant);
        let r = check_discrete_v_polyhedron(&Matrix::identity(2).scale(2.0), &sq, &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::NotInvariant);
        assert_eq!(r.witness().unwrap().point, vec![1.0, 1.0]);
    }

    #[test]
    fn discrete_ellipsoid_examples() {
        let r = check_discrete_ellipsoid(&Matrix::identity(2).scale(0.5), &disk(), &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::Invariant);
        assert_eq!(r.diagnostics["mu_min"], json!(0.25));
        let r = check_discrete_ellipsoid(&Matrix::identity(2).scale(2.0), &disk(), &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::NotInvariant);
        assert_eq!(r.diagnostics["mu_min"], json!(4.0));
        let r = check_discrete_ellipsoid(&rotation(), &disk(), &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        let r = check_discrete_ellipsoid(&rotation(), &disk(), &exact()).unwrap();
        assert_eq!(r.verdict, Verdict::Invariant);
    }

    #[test]
    fn schur_examples() {
        for (a, want) in [
            (Matrix::identity(2).scale(0.5), Verdict::Invariant),
            (Matrix::identity(2).scale(2.0), Verdict::NotInvariant),
            (Matrix::zeros(2, 2), Verdict::Invariant),
        ] {
            assert_eq!(check_discrete_ellipsoid_schur(&a, &disk(), &tol()).unwrap().verdict, want);
            assert_eq!(check_discrete_ellipsoid_mu_free(&a, &disk(), &tol()).unwrap().verdict, want);
        }
    }

    #[test]
    fn quadratic_examples() {
        let s = QuadraticSet { q: Matrix::from_diag(&[1.0, -1.0]) };
        let r = check_discrete_quadratic(&Matrix::identity(2), &s, &exact(), 0).unwrap();
        assert_eq!(r.verdict, Verdict::Invariant);
        let r = check_discrete_quadratic(&m(&[&[0.0, 1.0], &[1.0, 0.0]]), &s, &tol(), 0).unwrap();
        assert_eq!(r.verdict, Verdict::NotInvariant);
        assert!(r.witness().is_some());
        let r = check_discrete_quadratic(&Matrix::zeros(2, 2), &s, &exact(), 0).unwrap();
        assert_eq!(r.verdict, Verdict::Invariant);
    }

    #[test]
    fn discrete_cone_examples() {
        let d = DoubleCone { cone: std_cone() };
        let r = check_discrete_double_cone(&Matrix::identity(3), &d, &exact(), 0).unwrap();
        assert_eq!(r.verdict, Verdict::Invariant);
        let r = check_discrete_double_cone(&Matrix::from_diag(&[1.0, 1.0, 2.0]), &d, &tol(), 0).unwrap();
        assert_eq!(r.verdict, Verdict::Invariant);
        let r = check_discrete_double_cone(&Matrix::from_diag(&[2.0, 1.0, 1.0]), &d, &tol(), 0).unwrap();
        assert_eq!(r.verdict, Verdict::NotInvariant);

        let c = std_cone();
        let r = check_discrete_lorenz(&Matrix::from_diag(&[1.0, 1.0, 2.0]), &c, &tol(), 0).unwrap();
        assert_eq!(r.verdict, Verdict::Invariant);
        let r = check_discrete_lorenz(&Matrix::from_diag(&[1.0, 1.0, -1.0]), &c, &exact(), 0).unwrap();
        assert_eq!(r.verdict, Verdict::NotInvariant);
        assert_eq!(r.witness().unwrap().point, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn intervals() {
        let c = std_cone();
        assert_eq!(mu_interval(&Matrix::identity(3), &c, IntervalMode::Full).unwrap(), ScalarInterval::new(1.0, 1.0));
        let i = mu_interval(&Matrix::from_diag(&[2.0, 1.0, 1.0]), &c, IntervalMode::Full).unwrap();
        assert!(i.empty && i.lo == 4.0 && i.hi == 1.0);
        let i = mu_interval(&Matrix::from_diag(&[1.0, 1.0, 2.0]), &c, IntervalMode::Simple).unwrap();
        assert_eq!((i.lo, i.hi), (0.0, 4.0));
        assert_eq!(eta_interval(&Matrix::identity(3), &c).unwrap(), ScalarInterval::new(2.0, 2.0));
        let i = eta_interval(&Matrix::from_diag(&[3.0, 1.0, 1.0]), &c).unwrap();
        assert!(i.empty && i.lo == 6.0 && i.hi == 2.0);
    }

    #[test]
    fn tangent_intervals_survive_roundoff() {
        let c = LorenzCone::new(m(&[&[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 1.0, 0.0]])).unwrap();
        let i = mu_interval(&Matrix::identity(3), &c, IntervalMode::Full).unwrap();
        assert!(!i.empty && i.contains(1.0, 1e-12));
        assert!(!eta_interval(&Matrix::identity(3), &c).unwrap().empty);
        assert!(snapped(1.0, 0.5).empty);
    }

    #[test]
    fn sufficient_condition() {
        let c = std_cone();
        assert!(check_discrete_lorenz_sufficient(&Matrix::identity(3), &c, &tol()).unwrap().is_none());
        let r = check_discrete_lorenz_sufficient(&Matrix::zeros(3, 3), &c, &exact()).unwrap().unwrap();
        assert_eq!(r.verdict, Verdict::Invariant);
        let p = Matrix::outer(&[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0]);
        assert!(check_discrete_lorenz_sufficient(&p, &c, &exact()).unwrap().is_some());
        assert!(check_discrete_lorenz_sufficient(&p, &c, &tol()).unwrap().is_none());
    }

    #[test]
    fn geometry_classification() {
        let c = std_cone();
        let g = classify_mu_geometry(&Matrix::identity(3), &c, &tol()).unwrap();
        assert_eq!(g.conclusion, MuConclusion::MuInInterval);
        let g = classify_mu_geometry(&Matrix::from_diag(&[2.0, 1.0, 1.0]), &c, &tol()).unwrap();
        assert_eq!(g.conclusion, MuConclusion::NoMu);
        assert_eq!(g.image_classes[0], ImageClass::Exterior);
    }

    #[test]
    fn continuous_ellipsoid_examples() {
        let r = check_continuous_ellipsoid(&rotation(), &disk(), &exact()).unwrap();
        assert_eq!(r.verdict, Verdict::Invariant);
        let r = check_continuous_ellipsoid(&rotation(), &disk(), &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        let r = check_continuous_ellipsoid(&Matrix::identity(2), &disk(), &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::NotInvariant);
        let e = Ellipsoid::new(Matrix::from_diag(&[1.0, 4.0])).unwrap();
        let r = check_continuous_ellipsoid(&Matrix::identity(2).scale(-1.0), &e, &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::Invariant);
    }

    #[test]
    fn continuous_cone_examples() {
        let c = std_cone();
        let spiral = m(&[&[1.0, -1.0, 0.0], &[1.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let r = check_continuous_lorenz(&spiral, &c, &exact(), 0).unwrap();
        assert_eq!(r.verdict, Verdict::Invariant);
        let Certificate::ScalarLmi { value, .. } = r.certificate else { panic!() };
        assert_eq!(value, 2.0);
        let r = check_continuous_lorenz(&Matrix::identity(3).scale(-1.0), &c, &exact(), 0).unwrap();
        assert_eq!(r.verdict, Verdict::Invariant);
        let r = check_continuous_lorenz(&Matrix::from_diag(&[3.0, 1.0, 1.0]), &c, &tol(), 0).unwrap();
        assert_eq!(r.verdict, Verdict::NotInvariant);
        let d = DoubleCone { cone: std_cone() };
        let r = check_continuous_double_cone(&Matrix::from_diag(&[1.0, 1.0, -5.0]), &d, &tol(), 0).unwrap();
        assert_eq!(r.verdict, Verdict::NotInvariant);
        let r = check_continuous_double_cone(&Matrix::identity(3), &d, &exact(), 0).unwrap();
        assert_eq!(r.verdict, Verdict::Invariant);
    }

    #[test]
    fn dual_halfspace_orientation() {
        let c = std_cone();
        let r = check_dual_halfspace(&Matrix::identity(3), &c, 32, 0, &tol()).unwrap();
        assert!(r.scalar_holds && r.consistent);
        assert_eq!(r.orientation, HalfspaceOrientation::Cone);
        let r = check_dual_halfspace(&Matrix::from_diag(&[1.0, 1.0, -1.0]), &c, 32, 0, &tol()).unwrap();
        assert!(r.scalar_holds);
        assert_eq!(r.orientation, HalfspaceOrientation::NegatedCone);
        let p = Matrix::outer(&[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]);
        let r = check_dual_halfspace(&p, &c, 32, 0, &tol()).unwrap();
        assert_eq!(r.orientation, HalfspaceOrientation::Both);
    }

    #[test]
    fn boundary_flow() {
        let r = check_boundary_flow(&rotation(), &Matrix::identity(2), 6, 1e-12).unwrap();
        assert!(r.preserved);
        let r = check_boundary_flow(&Matrix::identity(2).scale(-1.0), &Matrix::identity(2), 2, 1e-12).unwrap();
        assert!(!r.preserved);
        assert_eq!(r.residuals[0], 2.0);
        assert!(check_boundary_flow(&Matrix::zeros(2, 2), &Matrix::identity(2), 5, 1e-12).unwrap().preserved);
    }

    #[test]
    fn dispatch_rejects_mismatch() {
        let set = SetSpec::Ellipsoid { q: Matrix::identity(3) }.build().unwrap();
        let p = Problem::new(Matrix::identity(2), TimeRegime::Discrete, set);
        assert!(matches!(check(&p), Err(CheckError::DimensionMismatch(_))));
    }
}
