//! The unit of work: a system matrix, a time regime, and one candidate set.

use serde::{Deserialize, Serialize};

use crate::numerics::{self, Matrix};
use crate::sets::SetDescription;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeRegime {
    /// `x_{k+1} = A x_k`
    Discrete,
    /// `x'(t) = A x(t)`
    Continuous,
}

/// Numeric thresholds governing every verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub psd: f64,
    pub lp: f64,
    pub pivot: f64,
    pub membership: f64,
    pub eig: f64,
    pub singular: f64,
    pub exp: f64,
    pub mu_search: f64,
    /// Sample budget for best-effort cone witnesses.
    pub witness_budget: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            psd: numerics::DEFAULT_PSD_TOL,
            lp: 1e-9,
            pivot: 1e-11,
            membership: 1e-7,
            eig: numerics::DEFAULT_EIG_TOL,
            singular: numerics::DEFAULT_SINGULAR_TOL,
            exp: numerics::DEFAULT_EXP_TOL,
            mu_search: 1e-10,
            witness_budget: 256,
        }
    }
}

impl Tolerances {
    pub fn with_psd(mut self, psd: f64) -> Self {
        self.psd = psd;
        self
    }

    pub fn with_lp(mut self, lp: f64) -> Self {
        self.lp = lp;
        self
    }

    pub fn with_membership(mut self, membership: f64) -> Self {
        self.membership = membership;
        self
    }

    pub fn lp_settings(&self) -> crate::lp::LpSettings {
        crate::lp::LpSettings { feas_tol: self.lp, pivot_tol: self.pivot, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub a: Matrix,
    pub time: TimeRegime,
    pub set: SetDescription,
    pub tolerances: Tolerances,
    pub seed: u64,
    /// Optional starting point for trajectory output.
    pub x0: Option<Vec<f64>>,
}

impl Problem {
    pub fn new(a: Matrix, time: TimeRegime, set: SetDescription) -> Self {
        Self { a, time, set, tolerances: Tolerances::default(), seed: 0, x0: None }
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = tolerances;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }
}
