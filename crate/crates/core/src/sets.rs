//! Candidate-set descriptions: validation, membership, boundary sampling,
//! tangent cones, and Lorenz-cone standardization.
//!
//! All sets are centered at the origin (ellipsoids) or have their apex at
//! the origin (cones); callers translate anything else beforehand.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{self, FeasOutcome, LinearProgramFeas, LpError, LpOutcome, LpSettings};
use crate::numerics::{self, dot, norm2, Inertia, Matrix, NumericsError, SymEig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SetError {
    #[error("invalid set: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("point is not on the boundary (classified {0:?})")]
    NotOnBoundary(Classification),
    #[error("degenerate set: {0}")]
    DegenerateSet(String),
    #[error("wrong inertia {found}, expected {expected}")]
    WrongInertia { found: Inertia, expected: Inertia },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Serializable, not-yet-validated set description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    HPolyhedron {
        #[serde(rename = "G")]
        g: Matrix,
        b: Vec<f64>,
    },
    HCone {
        #[serde(rename = "G")]
        g: Matrix,
    },
    VPolyhedron {
        vertices: Vec<Vec<f64>>,
        #[serde(default)]
        rays: Vec<Vec<f64>>,
    },
    VCone {
        rays: Vec<Vec<f64>>,
    },
    Ellipsoid {
        #[serde(rename = "Q")]
        q: Matrix,
    },
    LorenzCone {
        #[serde(rename = "Q")]
        q: Matrix,
        /// Optional hint selecting which nappe of `x^T Q x ≤ 0` is meant.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        axis: Option<Vec<f64>>,
    },
    Quadratic {
        #[serde(rename = "Q")]
        q: Matrix,
    },
    DoubleCone {
        #[serde(rename = "Q")]
        q: Matrix,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Polyhedron `{x | G x ≤ b}`; a cone when `b = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HPolyhedron {
    pub g: Matrix,
    pub b: Vec<f64>,
}

/// Convex hull of `vertices` plus the conic hull of `rays`.
#[derive(Debug, Clone, PartialEq)]
pub struct VPolyhedron {
    pub vertices: Vec<Vec<f64>>,
    pub rays: Vec<Vec<f64>>,
}

/// `{x | x^T Q x ≤ 1}` with `Q ≻ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    pub q: Matrix,
    eig: SymEigCache,
}

/// `{x | x^T Q x ≤ 1}` with `Q` symmetric and otherwise unrestricted.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSet {
    pub q: Matrix,
}

/// `{x | x^T Q x ≤ 0, u_n^T x ≥ 0}` where `Q` has inertia `(n-1, 0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LorenzCone {
    pub q: Matrix,
    eig: SymEigCache,
    /// Negative-eigenvalue eigenvector, signed so the cone contains `+u_n`.
    axis: Vec<f64>,
    t: Matrix,
    t_inv: Matrix,
    hint: Option<Vec<f64>>,
}

/// `C_L ∪ (-C_L) = {x | x^T Q x ≤ 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleCone {
    pub cone: LorenzCone,
}

#[derive(Debug, Clone)]
struct SymEigCache(SymEig);

impl PartialEq for SymEigCache {
    fn eq(&self, other: &Self) -> bool {
        self.0.eigenvalues == other.0.eigenvalues && self.0.eigenvectors == other.0.eigenvectors
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetDescription {
    HPolyhedron(HPolyhedron),
    HCone(HPolyhedron),
    VPolyhedron(VPolyhedron),
    VCone(VPolyhedron),
    Ellipsoid(Ellipsoid),
    LorenzCone(LorenzCone),
    Quadratic(QuadraticSet),
    DoubleCone(DoubleCone),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Inside,
    Boundary,
    Outside,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Membership {
    pub classification: Classification,
    /// Positive inside, zero on the boundary, negative outside; normalized
    /// by the point's magnitude so the same tolerance works near and far.
    pub slack: f64,
}

impl Membership {
    fn from_slack(slack: f64, tol: f64) -> Self {
        let classification = if slack > tol {
            Classification::Inside
        } else if slack >= -tol {
            Classification::Boundary
        } else {
            Classification::Outside
        };
        Self { classification, slack }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySample {
    pub points: Vec<Vec<f64>>,
    /// Facets with no feasible point (H-representations only).
    pub skipped_facets: Vec<usize>,
}

const INERTIA_TOL: f64 = 1e-10;

fn check_symmetric(q: &Matrix, name: &str, out: &mut Vec<String>) -> bool {
    if !q.is_square() {
        out.push(format!("{name} must be square, got {}x{}", q.rows(), q.cols()));
        return false;
    }
    let bound = numerics::DEFAULT_EIG_TOL * q.tol_scale();
    if q.max_asymmetry() > bound {
        out.push(format!("{name} is not symmetric (asymmetry {:.3e})", q.max_asymmetry()));
        return false;
    }
    true
}

fn expect_inertia(q: &Matrix, expected: Inertia, what: &str, out: &mut Vec<String>) {
    match numerics::inertia(q, INERTIA_TOL) {
        Ok(found) if found == expected => {}
        Ok(found) => out.push(format!("{what}: inertia {found} but {expected} is required")),
        Err(e) => out.push(format!("{what}: {e}")),
    }
}

fn check_vectors(vs: &[Vec<f64>], what: &str, dim: &mut Option<usize>, out: &mut Vec<String>) {
    for (i, v) in vs.iter().enumerate() {
        if v.is_empty() {
            out.push(format!("{what} {i} is empty"));
        }
        if v.iter().any(|x| !x.is_finite()) {
            out.push(format!("{what} {i} has a non-finite entry"));
        }
        match dim {
            None => *dim = Some(v.len()),
            Some(d) if *d != v.len() => {
                out.push(format!("{what} {i} has dimension {} but {d} was expected", v.len()))
            }
            _ => {}
        }
    }
}

/// Checks every side condition of the set definitions without building caches.
pub fn validate(spec: &SetSpec) -> ValidationReport {
    let mut v = Vec::new();
    match spec {
        SetSpec::HPolyhedron { g, b } => {
            if b.len() != g.rows() {
                v.push(format!("G has {} rows but b has {} entries", g.rows(), b.len()));
            }
            if b.iter().any(|x| !x.is_finite()) {
                v.push("b has a non-finite entry".into());
            }
            check_h_rows(g, &mut v);
        }
        SetSpec::HCone { g } => check_h_rows(g, &mut v),
        SetSpec::VPolyhedron { vertices, rays } => {
            if vertices.is_empty() {
                v.push("a V-polyhedron needs at least one vertex (use v_cone for pure cones)".into());
            }
            check_v(vertices, rays, &mut v);
        }
        SetSpec::VCone { rays } => {
            if rays.is_empty() {
                v.push("a V-cone needs at least one ray".into());
            }
            check_v(&[], rays, &mut v);
        }
        SetSpec::Ellipsoid { q } => {
            if check_symmetric(q, "Q", &mut v) {
                let n = q.rows();
                expect_inertia(q, Inertia { positive: n, zero: 0, negative: 0 }, "Q must be positive definite", &mut v);
            }
        }
        SetSpec::LorenzCone { q, axis } => {
            if check_symmetric(q, "Q", &mut v) {
                let n = q.rows();
                if n < 2 {
                    v.push("a Lorenz cone needs dimension at least 2".into());
                }
                expect_inertia(q, Inertia { positive: n - 1, zero: 0, negative: 1 }, "Lorenz cone Q", &mut v);
                if let Some(a) = axis {
                    if a.len() != n {
                        v.push(format!("axis hint has dimension {} but Q is {n}x{n}", a.len()));
                    }
                }
            }
        }
        SetSpec::Quadratic { q } => {
            check_symmetric(q, "Q", &mut v);
        }
        SetSpec::DoubleCone { q } => {
            if check_symmetric(q, "Q", &mut v) {
                let n = q.rows();
                if n < 2 {
                    v.push("a double cone needs dimension at least 2".into());
                }
                expect_inertia(q, Inertia { positive: n - 1, zero: 0, negative: 1 }, "double cone Q", &mut v);
            }
        }
    }
    ValidationReport { violations: v }
}

fn check_h_rows(g: &Matrix, out: &mut Vec<String>) {
    for i in 0..g.rows() {
        if g.row(i).iter().all(|&x| x == 0.0) {
            out.push(format!("row {i} of G is zero"));
        }
    }
}

fn check_v(vertices: &[Vec<f64>], rays: &[Vec<f64>], out: &mut Vec<String>) {
    let mut dim = None;
    check_vectors(vertices, "vertex", &mut dim, out);
    check_vectors(rays, "ray", &mut dim, out);
    for (j, r) in rays.iter().enumerate() {
        if r.iter().all(|&x| x == 0.0) {
            out.push(format!("ray {j} is zero"));
        }
    }
}

impl SetSpec {
    pub fn build(&self) -> Result<SetDescription, SetError> {
        let report = validate(self);
        if !report.is_valid() {
            return Err(SetError::Invalid(report.violations));
        }
        Ok(match self {
            SetSpec::HPolyhedron { g, b } => SetDescription::HPolyhedron(HPolyhedron { g: g.clone(), b: b.clone() }),
            SetSpec::HCone { g } => SetDescription::HCone(HPolyhedron { g: g.clone(), b: vec![0.0; g.rows()] }),
            SetSpec::VPolyhedron { vertices, rays } => {
                SetDescription::VPolyhedron(VPolyhedron { vertices: vertices.clone(), rays: rays.clone() })
            }
            SetSpec::VCone { rays } => SetDescription::VCone(VPolyhedron { vertices: Vec::new(), rays: rays.clone() }),
            SetSpec::Ellipsoid { q } => SetDescription::Ellipsoid(Ellipsoid::new(q.clone())?),
            SetSpec::LorenzCone { q, axis } => {
                SetDescription::LorenzCone(LorenzCone::with_axis_hint(q.clone(), axis.clone())?)
            }
            SetSpec::Quadratic { q } => SetDescription::Quadratic(QuadraticSet { q: q.symmetric_part() }),
            SetSpec::DoubleCone { q } => SetDescription::DoubleCone(DoubleCone { cone: LorenzCone::new(q.clone())? }),
        })
    }
}

impl Ellipsoid {
    pub fn new(q: Matrix) -> Result<Self, SetError> {
        let report = validate(&SetSpec::Ellipsoid { q: q.clone() });
        if !report.is_valid() {
            return Err(SetError::Invalid(report.violations));
        }
        let q = q.symmetric_part();
        let eig = numerics::sym_eig(&q, numerics::DEFAULT_EIG_TOL)?;
        Ok(Self { q, eig: SymEigCache(eig) })
    }

    pub fn eig(&self) -> &SymEig {
        &self.eig.0
    }

    /// Symmetric square root of `Q^{-1}`.
    pub fn inv_sqrt(&self) -> Matrix {
        self.eig.0.apply(|l| 1.0 / l.sqrt())
    }

    pub fn inverse(&self) -> Matrix {
        self.eig.0.apply(|l| 1.0 / l)
    }
}

/// Standardizing transform of a Lorenz-cone matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    /// `T = [u_1/√λ_1, …, u_{n-1}/√λ_{n-1}, u_n/√(-λ_n)]`, so `T^T Q T = diag(1,…,1,-1)`.
    pub t: Matrix,
    pub axis: Vec<f64>,
    pub eigenvalues: Vec<f64>,
}

/// Writes `C_L = T C_L*` for the standard cone `C_L* = {z | ‖z_{1..n-1}‖ ≤ z_n}`.
pub fn lorenz_standardize(q: &Matrix) -> Result<Standardization, SetError> {
    let cone = LorenzCone::new(q.clone())?;
    Ok(Standardization { t: cone.t.clone(), axis: cone.axis.clone(), eigenvalues: cone.eig.0.eigenvalues.clone() })
}

impl LorenzCone {
    pub fn new(q: Matrix) -> Result<Self, SetError> {
        Self::with_axis_hint(q, None)
    }

    /// When `hint` is given, `u_n` is signed so that `u_n · hint ≥ 0`.
    pub fn with_axis_hint(q: Matrix, hint: Option<Vec<f64>>) -> Result<Self, SetError> {
        if !q.is_square() {
            return Err(SetError::DimensionMismatch("Lorenz cone Q must be square".into()));
        }
        let n = q.rows();
        let q = q.symmetric_part();
        let eig = numerics::sym_eig(&q, numerics::DEFAULT_EIG_TOL)?;
        let expected = Inertia { positive: n.saturating_sub(1), zero: 0, negative: 1 };
        let found = numerics::inertia_of(&eig, INERTIA_TOL * q.tol_scale());
        if found != expected || n < 2 {
            return Err(SetError::WrongInertia { found, expected });
        }
        let mut axis = eig.eigenvector(n - 1);
        if let Some(h) = &hint {
            if h.len() != n {
                return Err(SetError::DimensionMismatch(format!("axis hint has dimension {}", h.len())));
            }
            if dot(&axis, h) < 0.0 {
                axis.iter_mut().for_each(|v| *v = -*v);
            }
        }
        let mut columns = Vec::with_capacity(n);
        let mut inv_rows = Vec::with_capacity(n);
        for i in 0..n {
            let lam = eig.eigenvalues[i];
            let u = if i == n - 1 { axis.clone() } else { eig.eigenvector(i) };
            let s = lam.abs().sqrt();
            columns.push(u.iter().map(|v| v / s).collect::<Vec<_>>());
            inv_rows.push(u.iter().map(|v| v * s).collect::<Vec<_>>());
        }
        let t = Matrix::from_columns(&columns)?;
        let t_inv = Matrix::from_rows(&inv_rows)?;
        Ok(Self { q, eig: SymEigCache(eig), axis, t, t_inv, hint })
    }

    pub fn dim(&self) -> usize {
        self.q.rows()
    }

    pub fn eig(&self) -> &SymEig {
        &self.eig.0
    }

    /// `u_n`, signed so the cone is the nappe containing `+u_n`.
    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    /// Eigenvector `i` of `Q` (descending order), with `u_n` sign-normalized.
    pub fn eigenvector(&self, i: usize) -> Vec<f64> {
        if i == self.dim() - 1 {
            self.axis.clone()
        } else {
            self.eig.0.eigenvector(i)
        }
    }

    pub fn lambda(&self, i: usize) -> f64 {
        self.eig.0.eigenvalues[i]
    }

    pub fn transform(&self) -> &Matrix {
        &self.t
    }

    pub fn inverse_transform(&self) -> &Matrix {
        &self.t_inv
    }

    /// `Q^{-1} = Σ u_i u_i^T / λ_i`.
    pub fn q_inverse(&self) -> Matrix {
        let mut out = self.eig.0.apply(|l| 1.0 / l);
        // The apply() path uses the unflipped u_n; the outer product is sign-free.
        out = out.symmetric_part();
        out
    }

    pub fn axis_hint(&self) -> Option<&[f64]> {
        self.hint.as_deref()
    }

    /// Coordinates in the standard cone.
    fn standard_coords(&self, x: &[f64]) -> Vec<f64> {
        self.t_inv.mul_vec(x)
    }
}

impl SetDescription {
    pub fn dim(&self) -> usize {
        match self {
            SetDescription::HPolyhedron(p) | SetDescription::HCone(p) => p.g.cols(),
            SetDescription::VPolyhedron(p) | SetDescription::VCone(p) => {
                p.vertices.first().or(p.rays.first()).map(Vec::len).unwrap_or(0)
            }
            SetDescription::Ellipsoid(e) => e.q.rows(),
            SetDescription::LorenzCone(c) => c.dim(),
            SetDescription::Quadratic(s) => s.q.rows(),
            SetDescription::DoubleCone(d) => d.cone.dim(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SetDescription::HPolyhedron(_) => "h_polyhedron",
            SetDescription::HCone(_) => "h_cone",
            SetDescription::VPolyhedron(_) => "v_polyhedron",
            SetDescription::VCone(_) => "v_cone",
            SetDescription::Ellipsoid(_) => "ellipsoid",
            SetDescription::LorenzCone(_) => "lorenz_cone",
            SetDescription::Quadratic(_) => "quadratic",
            SetDescription::DoubleCone(_) => "double_cone",
        }
    }

    pub fn to_spec(&self) -> SetSpec {
        match self {
            SetDescription::HPolyhedron(p) => SetSpec::HPolyhedron { g: p.g.clone(), b: p.b.clone() },
            SetDescription::HCone(p) => SetSpec::HCone { g: p.g.clone() },
            SetDescription::VPolyhedron(p) => {
                SetSpec::VPolyhedron { vertices: p.vertices.clone(), rays: p.rays.clone() }
            }
            SetDescription::VCone(p) => SetSpec::VCone { rays: p.rays.clone() },
            SetDescription::Ellipsoid(e) => SetSpec::Ellipsoid { q: e.q.clone() },
            SetDescription::LorenzCone(c) => SetSpec::LorenzCone { q: c.q.clone(), axis: c.hint.clone() },
            SetDescription::Quadratic(s) => SetSpec::Quadratic { q: s.q.clone() },
            SetDescription::DoubleCone(d) => SetSpec::DoubleCone { q: d.cone.q.clone() },
        }
    }
}

fn check_dim(set: &SetDescription, x: &[f64]) -> Result<(), SetError> {
    if x.len() != set.dim() {
        return Err(SetError::DimensionMismatch(format!(
            "point has dimension {} but the set lives in R^{}",
            x.len(),
            set.dim()
        )));
    }
    Ok(())
}

fn lp_settings() -> LpSettings {
    LpSettings::default()
}

/// Classifies `x` as inside, on the boundary of, or outside the set.
pub fn membership(set: &SetDescription, x: &[f64], tol: f64) -> Result<Membership, SetError> {
    check_dim(set, x)?;
    let slack = match set {
        SetDescription::HPolyhedron(p) | SetDescription::HCone(p) => h_slack(p, x),
        SetDescription::VPolyhedron(p) | SetDescription::VCone(p) => v_slack(p, x)?,
        SetDescription::Ellipsoid(e) => quad_slack(&e.q, x),
        SetDescription::Quadratic(s) => quad_slack(&s.q, x),
        SetDescription::LorenzCone(c) => cone_slack(c, x, false),
        SetDescription::DoubleCone(d) => cone_slack(&d.cone, x, true),
    };
    Ok(Membership::from_slack(slack, tol))
}

/// How far `x` lies outside the set (zero when inside or on the boundary).
///
/// Same scale as [`Membership::slack`], but V-representations only solve
/// the distance program when the point is not already feasible.
pub fn escape_margin(set: &SetDescription, x: &[f64]) -> Result<f64, SetError> {
    check_dim(set, x)?;
    let slack = match set {
        SetDescription::VPolyhedron(p) | SetDescription::VCone(p) => {
            if v_contains(p, x)? {
                0.0
            } else {
                -v_distance(p, x)? / x_scale(x)
            }
        }
        _ => membership(set, x, 0.0)?.slack,
    };
    Ok((-slack).max(0.0))
}

fn x_scale(x: &[f64]) -> f64 {
    norm2(x).max(1.0)
}

fn h_slack(p: &HPolyhedron, x: &[f64]) -> f64 {
    let worst = (0..p.g.rows())
        .map(|i| {
            let row = p.g.row(i);
            (p.b[i] - dot(row, x)) / norm2(row)
        })
        .fold(f64::INFINITY, f64::min);
    worst / x_scale(x)
}

fn quad_slack(q: &Matrix, x: &[f64]) -> f64 {
    let s = x_scale(x);
    (1.0 - q.bilinear(x, x)) / (s * s)
}

fn cone_slack(c: &LorenzCone, x: &[f64], double: bool) -> f64 {
    let z = c.standard_coords(x);
    let n = z.len();
    let radial = norm2(&z[..n - 1]);
    let height = if double { z[n - 1].abs() } else { z[n - 1] };
    (height - radial) / norm2(&z).max(1.0)
}

/// Program over `(β, β̂, extra)` with `Σ β_p x^p + Σ β̂_q x̂^q + Σ extra = target`.
fn generator_program(p: &VPolyhedron, extra_cols: &[Vec<f64>], target: &[f64]) -> LinearProgramFeas {
    let nv = p.vertices.len() + p.rays.len() + extra_cols.len();
    let mut lp = LinearProgramFeas::new(nv);
    for (k, &t) in target.iter().enumerate() {
        let mut row = Vec::with_capacity(nv);
        row.extend(p.vertices.iter().map(|v| v[k]));
        row.extend(p.rays.iter().map(|r| r[k]));
        row.extend(extra_cols.iter().map(|c| c[k]));
        lp.add_eq(row, t);
    }
    lp
}

fn v_contains(p: &VPolyhedron, x: &[f64]) -> Result<bool, SetError> {
    let mut lp = generator_program(p, &[], x);
    let l1 = p.vertices.len();
    if l1 > 0 {
        let mut row = vec![0.0; lp.num_vars()];
        row[..l1].iter_mut().for_each(|v| *v = 1.0);
        lp.add_eq(row, 1.0);
    }
    Ok(lp::solve_feasibility(&lp, lp_settings())?.is_feasible())
}

/// `min r` such that `‖Σ β x + Σ β̂ x̂ - x‖_∞ ≤ r`.
fn v_distance(p: &VPolyhedron, x: &[f64]) -> Result<f64, SetError> {
    let n = x.len();
    let l1 = p.vertices.len();
    let l2 = p.rays.len();
    let nv = l1 + l2 + 1;
    let mut lp = LinearProgramFeas::new(nv);
    for k in 0..n {
        let mut row: Vec<f64> = p.vertices.iter().map(|v| v[k]).chain(p.rays.iter().map(|r| r[k])).collect();
        row.push(-1.0);
        lp.add_le(row.clone(), x[k]);
        let mut neg: Vec<f64> = row[..l1 + l2].iter().map(|v| -v).collect();
        neg.push(-1.0);
        lp.add_le(neg, -x[k]);
    }
    if l1 > 0 {
        let mut row = vec![0.0; nv];
        row[..l1].iter_mut().for_each(|v| *v = 1.0);
        lp.add_eq(row, 1.0);
    }
    let mut c = vec![0.0; nv];
    c[nv - 1] = -1.0;
    match lp::maximize(&lp, &c, lp_settings())? {
        LpOutcome::Optimum { value, .. } => Ok(-value),
        other => Err(SetError::DegenerateSet(format!("distance program returned {other:?}"))),
    }
}

/// Largest `t ∈ [0, cap]` with `x + t d` in the set, or `None` if `x` is outside.
fn v_reach(p: &VPolyhedron, x: &[f64], d: &[f64], cap: Option<f64>) -> Result<Option<f64>, SetError> {
    let neg_d: Vec<f64> = d.iter().map(|v| -v).collect();
    let mut lp = generator_program(p, &[neg_d], x);
    let nv = lp.num_vars();
    let l1 = p.vertices.len();
    if l1 > 0 {
        let mut row = vec![0.0; nv];
        row[..l1].iter_mut().for_each(|v| *v = 1.0);
        lp.add_eq(row, 1.0);
    }
    if let Some(cap) = cap {
        let mut row = vec![0.0; nv];
        row[nv - 1] = 1.0;
        lp.add_le(row, cap);
    }
    let mut c = vec![0.0; nv];
    c[nv - 1] = 1.0;
    match lp::maximize(&lp, &c, lp_settings())? {
        LpOutcome::Optimum { value, .. } => Ok(Some(value.max(0.0))),
        LpOutcome::Unbounded { .. } => Ok(Some(f64::INFINITY)),
        LpOutcome::Infeasible => Ok(None),
    }
}

fn v_slack(p: &VPolyhedron, x: &[f64]) -> Result<f64, SetError> {
    let n = x.len();
    let mut depth = f64::INFINITY;
    for k in 0..n {
        for sign in [1.0, -1.0] {
            let mut d = vec![0.0; n];
            d[k] = sign;
            match v_reach(p, x, &d, Some(1.0))? {
                Some(t) => depth = depth.min(t),
                None => return Ok(-v_distance(p, x)? / x_scale(x)),
            }
        }
    }
    Ok(depth / x_scale(x))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Uniform random weights on the simplex.
fn simplex_weights(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| -(rng.random::<f64>().max(1e-300)).ln()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Deterministic boundary points for a fixed seed.
pub fn sample_boundary(set: &SetDescription, count: usize, seed: u64) -> Result<BoundarySample, SetError> {
    if count == 0 {
        return Err(SetError::DegenerateSet("sample count must be at least 1".into()));
    }
    let mut rng = rng(seed);
    let n = set.dim();
    let mut points = Vec::with_capacity(count);
    let mut skipped_facets = Vec::new();
    match set {
        SetDescription::Ellipsoid(e) => {
            while points.len() < count {
                let z = gaussian(&mut rng, n);
                let r = e.q.bilinear(&z, &z);
                if r > 0.0 {
                    points.push(z.iter().map(|v| v / r.sqrt()).collect());
                }
            }
        }
        SetDescription::Quadratic(s) => {
            let mut tries = 0;
            while points.len() < count {
                tries += 1;
                if tries > 1000 * count {
                    return Err(SetError::DegenerateSet("x^T Q x = 1 has no sampled solutions".into()));
                }
                let z = gaussian(&mut rng, n);
                let r = s.q.bilinear(&z, &z);
                if r > 1e-12 * norm2(&z).powi(2) {
                    points.push(z.iter().map(|v| v / r.sqrt()).collect());
                }
            }
        }
        SetDescription::LorenzCone(c) => {
            for _ in 0..count {
                points.push(cone_point(c, &mut rng, 1.0));
            }
        }
        SetDescription::DoubleCone(d) => {
            for _ in 0..count {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                points.push(cone_point(&d.cone, &mut rng, sign));
            }
        }
        SetDescription::HPolyhedron(p) | SetDescription::HCone(p) => {
            let m = p.g.rows();
            let mut dead = vec![false; m];
            let mut k = 0usize;
            while points.len() < count {
                if dead.iter().all(|&d| d) {
                    return Err(SetError::DegenerateSet("no facet has a feasible point".into()));
                }
                let i = k % m;
                k += 1;
                if dead[i] {
                    continue;
                }
                match facet_point(p, i, &mut rng)? {
                    Some(x) => points.push(x),
                    None => {
                        dead[i] = true;
                        skipped_facets.push(i);
                    }
                }
            }
        }
        SetDescription::VPolyhedron(p) | SetDescription::VCone(p) => {
            let mut attempts = 0;
            while points.len() < count {
                attempts += 1;
                if attempts > 50 * count + 100 {
                    return Err(SetError::DegenerateSet("ray shooting found no boundary points".into()));
                }
                let y = v_random_point(p, &mut rng);
                let d = gaussian(&mut rng, n);
                if let Some(t) = v_reach(p, &y, &d, None)? {
                    if t.is_finite() {
                        points.push(y.iter().zip(&d).map(|(a, b)| a + t * b).collect());
                    }
                }
            }
        }
    }
    Ok(BoundarySample { points, skipped_facets })
}

/// Points inside the set (not necessarily strictly), deterministic per seed.
pub fn sample_interior(set: &SetDescription, count: usize, seed: u64) -> Result<Vec<Vec<f64>>, SetError> {
    let mut rng = rng(seed ^ 0x9e37_79b9_7f4a_7c15);
    match set {
        SetDescription::VPolyhedron(p) | SetDescription::VCone(p) => {
            Ok((0..count).map(|_| v_random_point(p, &mut rng)).collect())
        }
        SetDescription::LorenzCone(c) => Ok((0..count)
            .map(|_| {
                let stretch = 1.0 + rng.random::<f64>();
                cone_point_scaled(c, &mut rng, 1.0, stretch)
            })
            .collect()),
        SetDescription::DoubleCone(d) => Ok((0..count)
            .map(|_| {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let stretch = 1.0 + rng.random::<f64>();
                cone_point_scaled(&d.cone, &mut rng, sign, stretch)
            })
            .collect()),
        SetDescription::HPolyhedron(_) | SetDescription::HCone(_) => {
            let boundary = sample_boundary(set, count.max(4) * 2, seed.wrapping_add(1))?.points;
            Ok((0..count)
                .map(|_| {
                    let a = &boundary[rng.random_range(0..boundary.len())];
                    let b = &boundary[rng.random_range(0..boundary.len())];
                    let t = rng.random::<f64>();
                    a.iter().zip(b).map(|(x, y)| t * x + (1.0 - t) * y).collect()
                })
                .collect())
        }
        SetDescription::Ellipsoid(_) | SetDescription::Quadratic(_) => {
            let boundary = sample_boundary(set, count.max(1), seed.wrapping_add(1))?.points;
            Ok(boundary
                .into_iter()
                .map(|x| {
                    let r = rng.random::<f64>();
                    x.into_iter().map(|v| v * r).collect()
                })
                .collect())
        }
    }
}

fn cone_point(c: &LorenzCone, rng: &mut ChaCha8Rng, sign: f64) -> Vec<f64> {
    cone_point_scaled(c, rng, sign, 1.0)
}

/// `T (w, stretch·‖w‖)`, negated when `sign < 0`.
fn cone_point_scaled(c: &LorenzCone, rng: &mut ChaCha8Rng, sign: f64, stretch: f64) -> Vec<f64> {
    let n = c.dim();
    let mut z = gaussian(rng, n - 1);
    let h = norm2(&z) * stretch;
    z.push(h);
    c.t.mul_vec(&z).into_iter().map(|v| sign * v).collect()
}

/// A point on facet `i` of `p`: a random convex combination of two LP
/// vertices of the facet, bounded by a box when the facet is unbounded.
fn facet_point(p: &HPolyhedron, i: usize, rng: &mut ChaCha8Rng) -> Result<Option<Vec<f64>>, SetError> {
    let n = p.g.cols();
    let bmax = p.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let radius = 10.0 * (1.0 + bmax);
    let mut lp = LinearProgramFeas::new(n);
    lp.set_all_free();
    for r in 0..p.g.rows() {
        if r == i {
            lp.add_eq(p.g.row(r).to_vec(), p.b[r]);
        } else {
            lp.add_le(p.g.row(r).to_vec(), p.b[r]);
        }
    }
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        lp.add_le(e.clone(), radius);
        e[k] = -1.0;
        lp.add_le(e, radius);
    }
    let mut ends = Vec::with_capacity(2);
    for _ in 0..2 {
        let c = gaussian(rng, n);
        match lp::maximize(&lp, &c, lp_settings())? {
            LpOutcome::Optimum { x, .. } => ends.push(x),
            LpOutcome::Infeasible => return Ok(None),
            LpOutcome::Unbounded { .. } => {
                return Err(SetError::DegenerateSet("boxed facet program reported unbounded".into()))
            }
        }
    }
    let t: f64 = rng.random();
    Ok(Some(ends[0].iter().zip(&ends[1]).map(|(a, b)| t * a + (1.0 - t) * b).collect()))
}

fn v_random_point(p: &VPolyhedron, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = p.vertices.first().or(p.rays.first()).map(Vec::len).unwrap_or(0);
    let mut y = vec![0.0; n];
    if !p.vertices.is_empty() {
        let w = simplex_weights(rng, p.vertices.len());
        for (v, wi) in p.vertices.iter().zip(w) {
            y.iter_mut().zip(v).for_each(|(a, b)| *a += wi * b);
        }
    }
    for r in &p.rays {
        let w: f64 = rng.random();
        y.iter_mut().zip(r).for_each(|(a, b)| *a += w * b);
    }
    y
}

/// Whether `v` lies in the tangent cone of the set at the boundary point `x`.
pub fn tangent_cone_contains(set: &SetDescription, x: &[f64], v: &[f64], tol: f64) -> Result<bool, SetError> {
    check_dim(set, v)?;
    let m = membership(set, x, tol)?;
    if m.classification != Classification::Boundary {
        return Err(SetError::NotOnBoundary(m.classification));
    }
    let vscale = norm2(v).max(1.0);
    match set {
        SetDescription::HPolyhedron(p) | SetDescription::HCone(p) => {
            let xs = x_scale(x);
            for i in 0..p.g.rows() {
                let row = p.g.row(i);
                let rn = norm2(row);
                let active = (p.b[i] - dot(row, x)) / rn <= tol * xs;
                if active && dot(row, v) / rn > tol * vscale {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        SetDescription::Ellipsoid(Ellipsoid { q, .. }) | SetDescription::Quadratic(QuadraticSet { q }) => {
            Ok(normal_test(q, x, v, tol))
        }
        SetDescription::LorenzCone(c) => {
            if norm2(x) <= tol {
                return Ok(membership(set, v, tol)?.classification != Classification::Outside);
            }
            Ok(normal_test(&c.q, x, v, tol))
        }
        SetDescription::DoubleCone(d) => {
            if norm2(x) <= tol {
                return Ok(membership(set, v, tol)?.classification != Classification::Outside);
            }
            Ok(normal_test(&d.cone.q, x, v, tol))
        }
        SetDescription::VPolyhedron(p) | SetDescription::VCone(p) => v_tangent(p, x, v),
    }
}

/// `v^T Q x ≤ 0`: `Qx` is the outward normal of `{x^T Q x ≤ c}` at `x`.
fn normal_test(q: &Matrix, x: &[f64], v: &[f64], tol: f64) -> bool {
    let qx = q.mul_vec(x);
    dot(v, &qx) <= tol * (norm2(v) * norm2(&qx)).max(1.0)
}

/// `v ∈ cone(P - x)`: `v = Σ β_p x^p + Σ β̂_q x̂^q - s x` with `β, β̂, s ≥ 0`
/// and, for polyhedra, `Σ β_p = s`.
fn v_tangent(p: &VPolyhedron, x: &[f64], v: &[f64]) -> Result<bool, SetError> {
    let neg_x: Vec<f64> = x.iter().map(|a| -a).collect();
    let mut lp = generator_program(p, &[neg_x], v);
    let nv = lp.num_vars();
    let l1 = p.vertices.len();
    if l1 > 0 {
        let mut row = vec![0.0; nv];
        row[..l1].iter_mut().for_each(|a| *a = 1.0);
        row[nv - 1] = -1.0;
        lp.add_eq(row, 0.0);
    }
    Ok(matches!(lp::solve_feasibility(&lp, lp_settings())?, FeasOutcome::Feasible(_)))
}
