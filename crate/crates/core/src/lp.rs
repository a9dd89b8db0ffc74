//! Dense phase-1 / phase-2 simplex for the feasibility questions behind the
//! polyhedral invariance conditions.
//!
//! Every program is brought to the standard form `P w = q, w ≥ 0` (free
//! variables split into nonnegative pairs, inequalities given slacks, rows
//! with negative right-hand side negated) and solved with Bland's rule.
//! An infeasible answer carries the terminal phase-1 simplex multipliers,
//! which form a Farkas certificate in the caller's original row space.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{dot, max_abs_vec, Matrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("numerical breakdown in simplex: {0}")]
    NumericalBreakdown(String),
    #[error("malformed linear program: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpSettings {
    /// Feasibility tolerance on constraint residuals.
    pub feas_tol: f64,
    /// Entries below this magnitude are never pivoted on.
    pub pivot_tol: f64,
    /// Reduced-cost threshold for entering columns.
    pub cost_tol: f64,
}

impl Default for LpSettings {
    fn default() -> Self {
        Self { feas_tol: 1e-9, pivot_tol: 1e-11, cost_tol: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarSign {
    Nonnegative,
    Free,
}

/// `E z = f`, `C z ≤ d`, with a sign restriction per variable.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgramFeas {
    num_vars: usize,
    eq_rows: Vec<Vec<f64>>,
    eq_rhs: Vec<f64>,
    ineq_rows: Vec<Vec<f64>>,
    ineq_rhs: Vec<f64>,
    signs: Vec<VarSign>,
}

impl LinearProgramFeas {
    /// A program over `num_vars` nonnegative variables with no constraints yet.
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            eq_rows: Vec::new(),
            eq_rhs: Vec::new(),
            ineq_rows: Vec::new(),
            ineq_rhs: Vec::new(),
            signs: vec![VarSign::Nonnegative; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn set_sign(&mut self, var: usize, sign: VarSign) -> &mut Self {
        self.signs[var] = sign;
        self
    }

    pub fn set_all_free(&mut self) -> &mut Self {
        self.signs.iter_mut().for_each(|s| *s = VarSign::Free);
        self
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
        self
    }

    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.ineq_rows.push(row);
        self.ineq_rhs.push(rhs);
        self
    }

    pub fn signs(&self) -> &[VarSign] {
        &self.signs
    }

    pub fn num_eq(&self) -> usize {
        self.eq_rows.len()
    }

    pub fn num_ineq(&self) -> usize {
        self.ineq_rows.len()
    }

    fn validate(&self) -> Result<(), LpError> {
        for (k, row) in self.eq_rows.iter().chain(&self.ineq_rows).enumerate() {
            if row.len() != self.num_vars {
                return Err(LpError::Malformed(format!(
                    "constraint {k} has {} coefficients, expected {}",
                    row.len(),
                    self.num_vars
                )));
            }
        }
        let finite = self
            .eq_rows
            .iter()
            .chain(&self.ineq_rows)
            .flatten()
            .chain(&self.eq_rhs)
            .chain(&self.ineq_rhs)
            .all(|v| v.is_finite());
        if !finite {
            return Err(LpError::Malformed("non-finite coefficient".into()));
        }
        Ok(())
    }

    /// Largest violation of the constraints and sign restrictions at `z`.
    pub fn max_violation(&self, z: &[f64]) -> f64 {
        let eq = self
            .eq_rows
            .iter()
            .zip(&self.eq_rhs)
            .map(|(r, &f)| (dot(r, z) - f).abs());
        let ineq = self
            .ineq_rows
            .iter()
            .zip(&self.ineq_rhs)
            .map(|(r, &d)| (dot(r, z) - d).max(0.0));
        let signs = self
            .signs
            .iter()
            .zip(z)
            .map(|(s, &v)| if *s == VarSign::Nonnegative { (-v).max(0.0) } else { 0.0 });
        eq.chain(ineq).chain(signs).fold(0.0, f64::max)
    }

    /// Checks that `y = (y_eq, y_ineq)` certifies infeasibility:
    /// `y_ineq ≤ 0`, `(E^T y_eq + C^T y_ineq)_j ≤ 0` on nonnegative variables
    /// and `= 0` on free ones, and `f^T y_eq + d^T y_ineq > 0`.
    ///
    /// Returns `(max dual-constraint violation, separation value)`.
    pub fn alternative_residuals(&self, y: &[f64]) -> (f64, f64) {
        let (y_eq, y_in) = y.split_at(self.eq_rows.len());
        let mut g = vec![0.0; self.num_vars];
        for (row, &yi) in self.eq_rows.iter().chain(&self.ineq_rows).zip(y_eq.iter().chain(y_in)) {
            for (gj, &a) in g.iter_mut().zip(row) {
                *gj += a * yi;
            }
        }
        let mut worst = y_in.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        for (gj, s) in g.iter().zip(&self.signs) {
            let viol = match s {
                VarSign::Nonnegative => *gj,
                VarSign::Free => gj.abs(),
            };
            worst = worst.max(viol);
        }
        let sep = dot(&self.eq_rhs, y_eq) + dot(&self.ineq_rhs, y_in);
        (worst, sep)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeasOutcome {
    Feasible(Vec<f64>),
    /// Multipliers for the equality rows followed by the inequality rows.
    Infeasible(Vec<f64>),
}

impl FeasOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasOutcome::Feasible(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FarkasOutcome {
    /// `P z = d`, `z ≥ 0`.
    Primal(Vec<f64>),
    /// `P^T y ≤ 0`, `d^T y > 0`.
    Alternative(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimum { x: Vec<f64>, value: f64 },
    /// A feasible point and a ray along which the objective grows without bound.
    Unbounded { point: Vec<f64>, direction: Vec<f64> },
    Infeasible,
}

/// Column of the standard form: which original variable it came from and
/// with which sign. `None` for slacks.
#[derive(Debug, Clone, Copy)]
struct StdColumn {
    var: Option<usize>,
    sign: f64,
}

struct StandardForm {
    /// Row-major `m × ncols`.
    p: Vec<Vec<f64>>,
    q: Vec<f64>,
    /// `+1` or `-1` per row: the factor applied to make `q ≥ 0`.
    row_sign: Vec<f64>,
    columns: Vec<StdColumn>,
}

impl StandardForm {
    fn build(lp: &LinearProgramFeas) -> Self {
        let mut columns = Vec::new();
        for (j, s) in lp.signs.iter().enumerate() {
            columns.push(StdColumn { var: Some(j), sign: 1.0 });
            if *s == VarSign::Free {
                columns.push(StdColumn { var: Some(j), sign: -1.0 });
            }
        }
        let n_struct = columns.len();
        let n_slack = lp.ineq_rows.len();
        for _ in 0..n_slack {
            columns.push(StdColumn { var: None, sign: 1.0 });
        }
        let mut p = Vec::new();
        let mut q = Vec::new();
        for (k, (row, &rhs)) in lp
            .eq_rows
            .iter()
            .zip(&lp.eq_rhs)
            .chain(lp.ineq_rows.iter().zip(&lp.ineq_rhs))
            .enumerate()
        {
            let mut r = vec![0.0; columns.len()];
            for (c, col) in columns.iter().take(n_struct).enumerate() {
                let j = col.var.expect("structural column");
                r[c] = col.sign * row[j];
            }
            if k >= lp.eq_rows.len() {
                r[n_struct + (k - lp.eq_rows.len())] = 1.0;
            }
            p.push(r);
            q.push(rhs);
        }
        let mut row_sign = vec![1.0; q.len()];
        for i in 0..q.len() {
            if q[i] < 0.0 {
                row_sign[i] = -1.0;
                q[i] = -q[i];
                p[i].iter_mut().for_each(|v| *v = -*v);
            }
        }
        Self { p, q, row_sign, columns }
    }

    fn to_original(&self, w: &[f64], num_vars: usize) -> Vec<f64> {
        let mut z = vec![0.0; num_vars];
        for (col, &v) in self.columns.iter().zip(w) {
            if let Some(j) = col.var {
                z[j] += col.sign * v;
            }
        }
        z
    }
}

/// Dense simplex tableau with artificial columns kept to the right of the
/// structural ones. The artificial block holds `B^{-1}` at all times.
struct Tableau {
    m: usize,
    n_struct: usize,
    /// `m` rows of `n_struct + m + 1` entries; the last entry is the rhs.
    rows: Vec<Vec<f64>>,
    /// Reduced costs; the last entry is minus the objective value.
    cost: Vec<f64>,
    basis: Vec<usize>,
    settings: LpSettings,
    iterations: usize,
    max_iterations: usize,
}

enum RunStatus {
    Optimal,
    Unbounded(usize),
}

impl Tableau {
    fn phase_one(sf: &StandardForm, settings: LpSettings) -> Self {
        let m = sf.q.len();
        let n_struct = sf.columns.len();
        let width = n_struct + m + 1;
        let mut rows = Vec::with_capacity(m);
        for i in 0..m {
            let mut r = vec![0.0; width];
            r[..n_struct].copy_from_slice(&sf.p[i]);
            r[n_struct + i] = 1.0;
            r[width - 1] = sf.q[i];
            rows.push(r);
        }
        // Minimize the sum of artificials: reduced cost of column j is
        // -sum_i P_ij on structural columns, 0 on the (basic) artificials.
        let mut cost = vec![0.0; width];
        for r in &rows {
            for j in 0..n_struct {
                cost[j] -= r[j];
            }
            cost[width - 1] -= r[width - 1];
        }
        let basis = (n_struct..n_struct + m).collect();
        let max_iterations = 50 * (m + n_struct) + 1000;
        Self { m, n_struct, rows, cost, basis, settings, iterations: 0, max_iterations }
    }

    fn width(&self) -> usize {
        self.n_struct + self.m + 1
    }

    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.width() - 1]
    }

    fn objective(&self) -> f64 {
        -self.cost[self.width() - 1]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width();
        let piv = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= piv;
        }
        self.rows[r][c] = 1.0;
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for j in 0..w {
                    row[j] -= f * prow[j];
                }
                row[c] = 0.0;
            }
        }
        let f = self.cost[c];
        if f != 0.0 {
            for j in 0..w {
                self.cost[j] -= f * prow[j];
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Bland's rule over the columns `0..limit`. With `bounded` set (phase 1),
    /// a column without a usable pivot is roundoff and is passed over.
    fn run(&mut self, limit: usize, cost_tol: f64, bounded: bool) -> Result<RunStatus, LpError> {
        let mut passed = vec![false; limit];
        loop {
            let entering = (0..limit).find(|&j| !passed[j] && self.cost[j] < -cost_tol);
            let Some(c) = entering else {
                return Ok(RunStatus::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.rows[i][c];
                if a > self.settings.pivot_tol {
                    let ratio = self.rhs(i).max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            let tie = (ratio - lr).abs() <= 1e-14 * (1.0 + lr.abs());
                            if ratio < lr && !tie || tie && self.basis[i] < self.basis[li] {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                if bounded {
                    passed[c] = true;
                    continue;
                }
                return Ok(RunStatus::Unbounded(c));
            };
            passed.iter_mut().for_each(|p| *p = false);
            self.pivot(r, c);
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(LpError::NumericalBreakdown(format!(
                    "iteration limit {} exceeded",
                    self.max_iterations
                )));
            }
        }
    }

    fn primal(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.n_struct];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n_struct {
                w[b] = self.rhs(i).max(0.0);
            }
        }
        w
    }

    /// Phase-1 multipliers `π = c_B^T B^{-1}`, read off the artificial block.
    fn phase_one_duals(&self) -> Vec<f64> {
        (0..self.m).map(|i| 1.0 - self.cost[self.n_struct + i]).collect()
    }

    /// Pivots basic artificials out wherever a usable structural entry exists.
    fn drive_out_artificials(&mut self) {
        for r in 0..self.m {
            if self.basis[r] < self.n_struct {
                continue;
            }
            let best = (0..self.n_struct)
                .map(|j| (j, self.rows[r][j].abs()))
                .filter(|&(_, a)| a > self.settings.pivot_tol)
                .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
            if let Some((c, _)) = best {
                self.pivot(r, c);
            }
        }
    }

    /// Replaces the objective with `minimize cost^T w` over structural columns.
    fn set_objective(&mut self, cost: &[f64]) {
        let w = self.width();
        let mut red = vec![0.0; w];
        red[..self.n_struct].copy_from_slice(cost);
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = if b < self.n_struct { cost[b] } else { 0.0 };
            if cb != 0.0 {
                for j in 0..w {
                    red[j] -= cb * self.rows[i][j];
                }
            }
        }
        self.cost = red;
    }
}

fn phase_one(
    lp: &LinearProgramFeas,
    settings: LpSettings,
) -> Result<(StandardForm, Tableau, bool), LpError> {
    lp.validate()?;
    let sf = StandardForm::build(lp);
    let mut tab = Tableau::phase_one(&sf, settings);
    let n_struct = tab.n_struct;
    tab.run(n_struct, settings.cost_tol, true)?;
    let scale = 1.0 + max_abs_vec(&sf.q);
    let feasible = tab.objective() <= settings.feas_tol * scale;
    Ok((sf, tab, feasible))
}

/// Decides feasibility of `E z = f, C z ≤ d` with sign restrictions.
pub fn solve_feasibility(lp: &LinearProgramFeas, settings: LpSettings) -> Result<FeasOutcome, LpError> {
    let (sf, tab, feasible) = phase_one(lp, settings)?;
    if feasible {
        let w = tab.primal();
        Ok(FeasOutcome::Feasible(sf.to_original(&w, lp.num_vars)))
    } else {
        let y = tab
            .phase_one_duals()
            .iter()
            .zip(&sf.row_sign)
            .map(|(p, s)| p * s)
            .collect();
        Ok(FeasOutcome::Infeasible(y))
    }
}

/// Farkas alternative for `P z = d, z ≥ 0`.
pub fn solve_farkas(p: &Matrix, d: &[f64], settings: LpSettings) -> Result<FarkasOutcome, LpError> {
    if p.rows() != d.len() {
        return Err(LpError::Malformed(format!(
            "P has {} rows but d has {} entries",
            p.rows(),
            d.len()
        )));
    }
    let mut lp = LinearProgramFeas::new(p.cols());
    for i in 0..p.rows() {
        lp.add_eq(p.row(i).to_vec(), d[i]);
    }
    Ok(match solve_feasibility(&lp, settings)? {
        FeasOutcome::Feasible(z) => FarkasOutcome::Primal(z),
        FeasOutcome::Infeasible(y) => FarkasOutcome::Alternative(y),
    })
}

/// Maximizes `c^T z` over the program's feasible set.
pub fn maximize(lp: &LinearProgramFeas, c: &[f64], settings: LpSettings) -> Result<LpOutcome, LpError> {
    if c.len() != lp.num_vars {
        return Err(LpError::Malformed("objective length does not match variable count".into()));
    }
    let (sf, mut tab, feasible) = phase_one(lp, settings)?;
    if !feasible {
        return Ok(LpOutcome::Infeasible);
    }
    tab.drive_out_artificials();
    let std_cost: Vec<f64> = sf
        .columns
        .iter()
        .map(|col| col.var.map(|j| -col.sign * c[j]).unwrap_or(0.0))
        .collect();
    tab.set_objective(&std_cost);
    let cost_tol = settings.cost_tol * (1.0 + max_abs_vec(c));
    let n_struct = tab.n_struct;
    match tab.run(n_struct, cost_tol, false)? {
        RunStatus::Optimal => {
            let x = sf.to_original(&tab.primal(), lp.num_vars);
            let value = dot(c, &x);
            Ok(LpOutcome::Optimum { x, value })
        }
        RunStatus::Unbounded(e) => {
            let point = sf.to_original(&tab.primal(), lp.num_vars);
            let mut dw = vec![0.0; n_struct];
            dw[e] = 1.0;
            for (i, &b) in tab.basis.iter().enumerate() {
                if b < n_struct {
                    dw[b] = -tab.rows[i][e];
                }
            }
            let direction = sf.to_original(&dw, lp.num_vars);
            Ok(LpOutcome::Unbounded { point, direction })
        }
    }
}

/// `max c^T x` subject to `G x ≤ b` with `x` free.
pub fn maximize_linear(c: &[f64], g: &Matrix, b: &[f64], settings: LpSettings) -> Result<LpOutcome, LpError> {
    if g.rows() != b.len() || g.cols() != c.len() {
        return Err(LpError::Malformed("dimensions of c, G and b disagree".into()));
    }
    let mut lp = LinearProgramFeas::new(g.cols());
    lp.set_all_free();
    for i in 0..g.rows() {
        lp.add_le(g.row(i).to_vec(), b[i]);
    }
    maximize(&lp, c, settings)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings() -> LpSettings {
        LpSettings::default()
    }

    #[test]
    fn feasibility_identity() {
        let mut lp = LinearProgramFeas::new(2);
        lp.add_eq(vec![1.0, 0.0], 1.0).add_eq(vec![0.0, 1.0], 1.0);
        match solve_feasibility(&lp, settings()).unwrap() {
            FeasOutcome::Feasible(z) => assert_eq!(z, vec![1.0, 1.0]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nonnegative_sum_cannot_be_negative() {
        let mut lp = LinearProgramFeas::new(2);
        lp.add_eq(vec![1.0, 1.0], -1.0);
        match solve_feasibility(&lp, settings()).unwrap() {
            FeasOutcome::Infeasible(y) => {
                let (viol, sep) = lp.alternative_residuals(&y);
                assert!(viol <= 0.0 && sep > 0.0, "viol {viol} sep {sep}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn diamond_row_subproblem() {
        // h >= 0, G^T h = (GA)_1 = (-1,-1), b^T h <= 1 for the diamond and A = -I.
        let g = [[1.0, 1.0], [-1.0, 1.0], [1.0, -1.0], [-1.0, -1.0]];
        let mut lp = LinearProgramFeas::new(4);
        lp.add_eq(g.iter().map(|r| r[0]).collect(), -1.0);
        lp.add_eq(g.iter().map(|r| r[1]).collect(), -1.0);
        lp.add_le(vec![1.0; 4], 1.0);
        match solve_feasibility(&lp, settings()).unwrap() {
            FeasOutcome::Feasible(h) => {
                assert!(lp.max_violation(&h) <= 1e-12);
                assert_eq!(h, vec![0.0, 0.0, 0.0, 1.0]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn farkas_examples() {
        let i2 = Matrix::identity(2);
        assert_eq!(solve_farkas(&i2, &[1.0, 1.0], settings()).unwrap(), FarkasOutcome::Primal(vec![1.0, 1.0]));
        match solve_farkas(&i2, &[-1.0, 0.0], settings()).unwrap() {
            FarkasOutcome::Alternative(y) => {
                let pty = i2.tr_mul_vec(&y);
                assert!(pty.iter().all(|&v| v <= 0.0));
                assert!(dot(&[-1.0, 0.0], &y) > 0.0);
                assert_eq!(y, vec![-1.0, 0.0]);
            }
            other => panic!("unexpected {other:?}"),
        }
        let p = Matrix::from_rows(&[[1.0, -1.0]]).unwrap();
        match solve_farkas(&p, &[0.0], settings()).unwrap() {
            FarkasOutcome::Primal(z) => assert!((z[0] - z[1]).abs() <= 1e-12 && z.iter().all(|&v| v >= 0.0)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn maximize_over_diamond() {
        let g = Matrix::from_rows(&[[1.0, 1.0], [-1.0, 1.0], [1.0, -1.0], [-1.0, -1.0]]).unwrap();
        match maximize_linear(&[1.0, 0.0], &g, &[1.0; 4], settings()).unwrap() {
            LpOutcome::Optimum { x, value } => {
                assert!((value - 1.0).abs() < 1e-12);
                assert!((x[0] - 1.0).abs() < 1e-12 && x[1].abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn maximize_unbounded_and_infeasible() {
        let g = Matrix::from_rows(&[[-1.0]]).unwrap();
        match maximize_linear(&[1.0], &g, &[0.0], settings()).unwrap() {
            LpOutcome::Unbounded { point, direction } => {
                assert!(point[0] >= -1e-12);
                assert!(direction[0] > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        let g = Matrix::from_rows(&[[1.0], [-1.0]]).unwrap();
        assert_eq!(maximize_linear(&[1.0], &g, &[-1.0, 0.0], settings()).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn free_variables_reach_negative_values() {
        let mut lp = LinearProgramFeas::new(2);
        lp.set_sign(0, VarSign::Free);
        lp.add_eq(vec![1.0, 1.0], -2.0);
        match solve_feasibility(&lp, settings()).unwrap() {
            FeasOutcome::Feasible(z) => {
                assert!(lp.max_violation(&z) <= 1e-12);
                assert!(z[0] <= -2.0 + 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_rows_are_rejected() {
        let mut lp = LinearProgramFeas::new(2);
        lp.add_eq(vec![1.0], 1.0);
        assert!(matches!(solve_feasibility(&lp, settings()), Err(LpError::Malformed(_))));
    }
}
