//! Browser bindings for the planar demo in `www/`. Every export takes a
//! problem as JSON and returns JSON; errors come back as strings.

use invkit::bridge::{self, EulerMethod};
use invkit::conditions;
use invkit::io;
use invkit::oracle;
use invkit::problem::Problem;
use invkit::sets::{self, Classification, SetDescription};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const GRID: usize = 72;

fn load(problem_json: &str) -> Result<Problem, String> {
    io::parse_problem(problem_json).map_err(|e| e.to_string())
}

fn planar(p: &Problem) -> Result<(), String> {
    if p.dim() != 2 {
        return Err(format!("the demo draws planar problems only, got dimension {}", p.dim()));
    }
    Ok(())
}

/// Half-width of the square view around the origin.
fn view_radius(set: &SetDescription) -> f64 {
    let bounded = matches!(set, SetDescription::Ellipsoid(_) | SetDescription::HPolyhedron(_) | SetDescription::VPolyhedron(_));
    let reach = sets::sample_boundary(set, 64, 1)
        .map(|s| s.points.iter().map(|x| x[0].abs().max(x[1].abs())).fold(0.0, f64::max))
        .unwrap_or(0.0);
    if bounded && reach > 0.0 && reach.is_finite() {
        (1.4 * reach).min(50.0)
    } else {
        2.0
    }
}

/// Row-major classification grid: 0 outside, 1 boundary, 2 inside.
fn membership_grid(set: &SetDescription, radius: f64, tol: f64) -> Result<Vec<u8>, String> {
    let mut cells = Vec::with_capacity(GRID * GRID);
    let step = 2.0 * radius / GRID as f64;
    for row in 0..GRID {
        let y = radius - (row as f64 + 0.5) * step;
        for col in 0..GRID {
            let x = -radius + (col as f64 + 0.5) * step;
            let c = sets::membership(set, &[x, y], tol).map_err(|e| e.to_string())?.classification;
            cells.push(match c {
                Classification::Outside => 0,
                Classification::Boundary => 1,
                Classification::Inside => 2,
            });
        }
    }
    Ok(cells)
}

/// Verdict, certificate or witness, a membership grid and sampled trajectories.
pub fn check_planar_json(problem_json: &str, trajectories: usize, steps: usize) -> Result<String, String> {
    let p = load(problem_json)?;
    planar(&p)?;
    let report = conditions::check(&p).map_err(|e| e.to_string())?;
    let radius = view_radius(&p.set);
    let tol = p.tolerances.membership;
    let dt = oracle::observation_dt(&p.a);
    let starts = oracle::sample_starts(&p.set, trajectories, p.seed).map_err(|e| e.to_string())?;
    let mut paths = Vec::with_capacity(starts.len());
    for x0 in starts {
        let traj = match oracle::simulate(&p.a, p.time, &x0, steps, dt) {
            Ok(t) => t,
            Err(_) => continue,
        };
        let mut escaped = false;
        for x in &traj.states {
            if sets::escape_margin(&p.set, x).map_err(|e| e.to_string())? > tol {
                escaped = true;
                break;
            }
        }
        paths.push(json!({ "points": traj.states, "escaped": escaped }));
    }
    let doc = json!({
        "report": io::report_file(&report, p.seed),
        "view": { "radius": radius, "size": GRID, "cells": membership_grid(&p.set, radius, tol)? },
        "trajectories": paths,
        "dt": dt,
    });
    Ok(doc.to_string())
}

/// Euler steplength table for a continuous problem.
pub fn euler_sweep_json(problem_json: &str, method: &str, points: usize) -> Result<String, String> {
    let p = load(problem_json)?;
    let method: EulerMethod = method.parse()?;
    let grid = bridge::default_grid(&p.a, points);
    let r = bridge::max_preserving_dt(&p, method, &grid).map_err(|e| e.to_string())?;
    serde_json::to_string(&r).map_err(|e| e.to_string())
}

/// Interval and geometry diagnostics for cone problems, `null` otherwise.
pub fn cone_diagnostics_json(problem_json: &str) -> Result<String, String> {
    let p = load(problem_json)?;
    let d = conditions::diagnose(&p).map_err(|e| e.to_string())?;
    Ok(d.unwrap_or(Value::Null).to_string())
}

#[wasm_bindgen(js_name = checkPlanar)]
pub fn check_planar(problem_json: &str, trajectories: u32, steps: u32) -> Result<String, JsValue> {
    check_planar_json(problem_json, trajectories as usize, steps as usize).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = eulerSweep)]
pub fn euler_sweep(problem_json: &str, method: &str, points: u32) -> Result<String, JsValue> {
    euler_sweep_json(problem_json, method, points as usize).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = coneDiagnostics)]
pub fn cone_diagnostics(problem_json: &str) -> Result<String, JsValue> {
    cone_diagnostics_json(problem_json).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const DISK: &str = r#"{"system":{"A":[[0,-1],[1,0]],"time":"continuous"},"set":{"type":"ellipsoid","Q":[[1,0],[0,1]]},"tolerances":{"psd":0}}"#;
    const WEDGE: &str = r#"{"system":{"A":[[1,0],[0,2]],"time":"continuous"},"set":{"type":"lorenz_cone","Q":[[1,0],[0,-1]]}}"#;

    #[test]
    fn planar_check_draws_the_disk() {
        let v: Value = serde_json::from_str(&check_planar_json(DISK, 6, 40).unwrap()).unwrap();
        assert_eq!(v["report"]["verdict"], "invariant");
        let cells = v["view"]["cells"].as_array().unwrap();
        assert_eq!(cells.len(), GRID * GRID);
        assert_eq!(cells[GRID * GRID / 2 + GRID / 2], 2);
        assert_eq!(cells[0], 0);
        let paths = v["trajectories"].as_array().unwrap();
        assert_eq!(paths.len(), 6);
        assert!(paths.iter().all(|t| t["escaped"] == false));
    }

    #[test]
    fn expanding_map_escapes() {
        let p = r#"{"system":{"A":[[1.5,0],[0,1.5]],"time":"discrete"},"set":{"type":"h_polyhedron","G":[[1,0],[-1,0],[0,1],[0,-1]],"b":[1,1,1,1]}}"#;
        let v: Value = serde_json::from_str(&check_planar_json(p, 4, 10).unwrap()).unwrap();
        assert_eq!(v["report"]["verdict"], "not_invariant");
        assert!(v["trajectories"].as_array().unwrap().iter().all(|t| t["escaped"] == true));
    }

    #[test]
    fn rejects_other_dimensions() {
        let p = r#"{"system":{"A":[[1]],"time":"discrete"},"set":{"type":"ellipsoid","Q":[[1]]}}"#;
        assert!(check_planar_json(p, 4, 10).unwrap_err().contains("planar"));
        assert!(check_planar_json("{", 4, 10).is_err());
    }

    #[test]
    fn sweep_and_diagnostics() {
        let v: Value = serde_json::from_str(&euler_sweep_json(DISK, "backward", 8).unwrap()).unwrap();
        assert_eq!(v["table"].as_array().unwrap().len(), 8);
        assert!(euler_sweep_json(DISK, "sideways", 8).is_err());
        let d: Value = serde_json::from_str(&cone_diagnostics_json(WEDGE).unwrap()).unwrap();
        assert!(d.is_object());
        assert_eq!(cone_diagnostics_json(DISK).unwrap(), "null");
    }
}
