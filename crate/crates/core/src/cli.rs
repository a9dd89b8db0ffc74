//! Command-line front end. Exit codes: 0 invariant, 1 not invariant,
//! 2 inconclusive, 3 input or runtime error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use log::{debug, info};
use serde_json::json;

use crate::bridge::{self, EulerMethod};
use crate::conditions::{self, Verdict};
use crate::io;
use crate::numerics::Matrix;
use crate::oracle;
use crate::problem::{Problem, TimeRegime};
use crate::sets::{self, SetDescription};

pub const EXIT_INPUT_ERROR: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "invkit", version, about = "Check positive invariance of sets under linear dynamics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// Problem description (JSON).
    pub problem: PathBuf,
    /// Write the output here instead of stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Override the semidefiniteness band.
    #[arg(long = "tol-psd")]
    pub tol_psd: Option<f64>,
    /// Override the LP feasibility tolerance.
    #[arg(long = "tol-lp")]
    pub tol_lp: Option<f64>,
    /// Override the set membership tolerance.
    #[arg(long = "tol-membership")]
    pub tol_membership: Option<f64>,
    /// Seed for sampling (default: the problem's seed, else 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sample count for witness searches and sampled diagnostics.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// Steps per simulated trajectory.
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    /// Euler method: forward or backward.
    #[arg(long, default_value = "backward")]
    pub method: EulerMethod,
    /// Number of grid points for the Euler sweep.
    #[arg(long, default_value_t = 32)]
    pub grid: usize,
    /// Time step for `simulate`, or a single step for `euler`.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Highest order for the boundary-flow test in `diagnose`.
    #[arg(long = "k-max", default_value_t = 4)]
    pub k_max: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide invariance and emit a report with certificate or refutation.
    Check(Common),
    /// Search simulated trajectories for an escape.
    Witness(Common),
    /// Write a trajectory as CSV.
    Simulate(Common),
    /// Sweep Euler steplengths for a continuous problem.
    Euler(Common),
    /// Interval, geometry and sampled diagnostics.
    Diagnose(Common),
    /// Re-verify the certificate in a report file (given with --report).
    Verify(Common),
}

/// Parses arguments and runs a command, writing to the given streams.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_INPUT_ERROR;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "invkit: {}", msg.lines().next().unwrap_or(""));
            EXIT_INPUT_ERROR
        }
    }
}

fn load(c: &Common) -> Result<Problem, String> {
    let text = std::fs::read_to_string(&c.problem).map_err(|e| format!("{}: {e}", c.problem.display()))?;
    let mut p = io::parse_problem(&text).map_err(|e| e.to_string())?;
    if let Some(v) = c.tol_psd {
        p.tolerances.psd = v;
    }
    if let Some(v) = c.tol_lp {
        p.tolerances.lp = v;
    }
    if let Some(v) = c.tol_membership {
        p.tolerances.membership = v;
    }
    if let Some(s) = c.seed {
        p.seed = s;
    }
    debug!("loaded {} problem on a {} set in R^{}", time_name(p.time), p.set.kind(), p.dim());
    Ok(p)
}

fn time_name(t: TimeRegime) -> &'static str {
    match t {
        TimeRegime::Discrete => "discrete",
        TimeRegime::Continuous => "continuous",
    }
}

fn emit(c: &Common, out: &mut dyn Write, text: &str) -> Result<(), String> {
    match &c.report {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None if text.ends_with('\n') => write!(out, "{text}").map_err(|e| e.to_string()),
        None => writeln!(out, "{text}").map_err(|e| e.to_string()),
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable output")
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32, String> {
    match cmd {
        Command::Check(c) => {
            let p = load(&c)?;
            let report = conditions::check(&p).map_err(|e| e.to_string())?;
            info!("{} -> {:?} in {:.2} ms", report.check, report.verdict, report.elapsed_ms);
            let file = io::report_file(&report, p.seed);
            emit(&c, out, &pretty(&file))?;
            if c.report.is_some() {
                writeln!(out, "{}", verdict_name(report.verdict)).map_err(|e| e.to_string())?;
            }
            Ok(report.verdict.exit_code())
        }
        Command::Witness(c) => {
            let p = load(&c)?;
            let escape = oracle::falsify(&p, c.samples, c.steps, p.seed).map_err(|e| e.to_string())?;
            let found = escape.is_some();
            let doc = json!({
                "found": found,
                "escape": escape,
                "samples": c.samples,
                "steps": c.steps,
                "seed": p.seed,
                "tolerances": p.tolerances,
            });
            emit(&c, out, &pretty(&doc))?;
            Ok(if found { 1 } else { 0 })
        }
        Command::Simulate(c) => {
            let p = load(&c)?;
            let x0 = match &p.x0 {
                Some(x) => x.clone(),
                None => default_start(&p.set, p.seed)?,
            };
            let dt = c.dt.unwrap_or_else(|| oracle::observation_dt(&p.a));
            let traj = oracle::simulate(&p.a, p.time, &x0, c.steps, dt).map_err(|e| e.to_string())?;
            emit(&c, out, &trajectory_csv(&traj))?;
            Ok(0)
        }
        Command::Euler(c) => {
            let p = load(&c)?;
            let grid = match c.dt {
                Some(dt) => vec![dt],
                None => bridge::default_grid(&p.a, c.grid),
            };
            let r = bridge::max_preserving_dt(&p, c.method, &grid).map_err(|e| e.to_string())?;
            emit(&c, out, &pretty(&r))?;
            Ok(0)
        }
        Command::Diagnose(c) => {
            let p = load(&c)?;
            emit(&c, out, &pretty(&diagnostics(&p, &c)?))?;
            Ok(0)
        }
        Command::Verify(c) => {
            let p = load(&c)?;
            let path = c.report.as_ref().ok_or("verify needs --report PATH")?;
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let report = io::parse_report(&text).map_err(|e| e.to_string())?;
            let outcome = io::verify_report(&p, &report).map_err(|e| e.to_string())?;
            writeln!(out, "{}", pretty(&outcome)).map_err(|e| e.to_string())?;
            Ok(if outcome.valid && report.verdict == Verdict::Invariant { 0 } else { 1 })
        }
    }
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Invariant => "invariant",
        Verdict::NotInvariant => "not_invariant",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn default_start(set: &SetDescription, seed: u64) -> Result<Vec<f64>, String> {
    let pts = sets::sample_boundary(set, 1, seed).map_err(|e| e.to_string())?.points;
    pts.into_iter().next().ok_or_else(|| "could not sample a starting point".to_string())
}

pub fn trajectory_csv(t: &oracle::Trajectory) -> String {
    let n = t.states.first().map_or(0, Vec::len);
    let mut s = String::from("t");
    for i in 1..=n {
        s.push_str(&format!(",x{i}"));
    }
    s.push('\n');
    for (time, x) in t.times.iter().zip(&t.states) {
        s.push_str(&time.to_string());
        for v in x {
            s.push(',');
            s.push_str(&v.to_string());
        }
        s.push('\n');
    }
    s
}

fn diagnostics(p: &Problem, c: &Common) -> Result<serde_json::Value, String> {
    let mut doc = json!({ "set": p.set.kind(), "time": time_name(p.time), "seed": p.seed });
    if let Some(cone) = conditions::diagnose(p).map_err(|e| e.to_string())? {
        doc["cone"] = cone;
    }
    let q: Option<&Matrix> = match &p.set {
        SetDescription::Ellipsoid(e) => Some(&e.q),
        SetDescription::Quadratic(s) => Some(&s.q),
        SetDescription::LorenzCone(l) => Some(&l.q),
        SetDescription::DoubleCone(d) => Some(&d.cone.q),
        _ => None,
    };
    if let (Some(q), true) = (q, c.k_max >= 2) {
        let bf = conditions::check_boundary_flow(&p.a, q, c.k_max, p.tolerances.psd).map_err(|e| e.to_string())?;
        doc["boundary_flow"] = serde_json::to_value(bf).unwrap_or_default();
    }
    if p.time == TimeRegime::Continuous {
        let n = oracle::nagumo_sample_check(p, c.samples, p.seed).map_err(|e| e.to_string())?;
        doc["nagumo"] = serde_json::to_value(n).unwrap_or_default();
    }
    Ok(doc)
}
