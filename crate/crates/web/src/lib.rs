//! Browser bindings. Each operation has a plain Rust entry point returning
//! JSON (usable and testable natively) and a thin `wasm_bindgen` wrapper.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use meanfield::combinatorics::{admissible_m, theta_weyl_coefficients};
use meanfield::fock::{Dispersion, ModeSystem, PairPotential};
use meanfield::harness::report::FitOutcome;
use meanfield::harness::{
    run_sweep, ExperimentConfig, Family, MSchedule, OutputSpec, StateSpec, SystemSpec, Tolerances,
};
use meanfield::hartree::{evolve_hartree, uniform_grid, DEFAULT_TOL};

/// Largest `n` a sweep may request from the page; keeps a click under a
/// second or so.
pub const MAX_N: usize = 24;

/// `(cos θ, i sin θ)` as `[re, im]` pairs.
fn unit_pair(theta: f64) -> Vec<[f64; 2]> {
    vec![[theta.cos(), 0.0], [0.0, theta.sin()]]
}

fn lattice(g: f64) -> SystemSpec {
    SystemSpec::Lattice {
        points: 2,
        dispersion: Dispersion::Laplacian { hopping: 1.0 },
        potential: if g == 0.0 { PairPotential::None } else { PairPotential::Contact { g } },
    }
}

#[derive(Serialize)]
struct Coefficients {
    n: usize,
    m: usize,
    dnm: f64,
    a: Vec<f64>,
}

/// `A_k`, `k = 0..n-m`, and `d_{n,m}`.
pub fn theta_coefficients_json(n: usize, m: usize) -> Result<String, String> {
    if n == 0 || n > 2000 {
        return Err(format!("n = {n} must lie in 1..=2000"));
    }
    let c = theta_weyl_coefficients(n, m).map_err(|e| e.to_string())?;
    serde_json::to_string(&Coefficients { n, m, dnm: c.dnm(), a: c.a }).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct SweepPoint {
    n: usize,
    m: usize,
    trace_dist: f64,
}

#[derive(Serialize)]
struct Sweep {
    family: String,
    points: Vec<SweepPoint>,
    slope: Option<f64>,
    r2: Option<f64>,
    note: Option<String>,
}

/// Trace distance to the Hartree projector at time `t` for `n = 4..=n_top`
/// on the two-site ring with contact coupling `g`.
pub fn convergence_json(family: &str, g: f64, t: f64, n_top: usize, m: usize, theta: f64) -> Result<String, String> {
    let family = match family {
        "product" => Family::Product,
        "coherent" => Family::Coherent,
        "theta" => Family::Theta,
        other => return Err(format!("unknown family {other:?}")),
    };
    if !(4..=MAX_N).contains(&n_top) {
        return Err(format!("largest n must lie in 4..={MAX_N}"));
    }
    if family == Family::Theta && m > admissible_m(4) {
        return Err(format!("m = {m} is not admissible down to n = 4 (max {})", admissible_m(4)));
    }
    let cfg = ExperimentConfig {
        system: lattice(g),
        state: StateSpec {
            family,
            phi: Some(unit_pair(theta)),
            m_schedule: (family == Family::Theta).then_some(MSchedule::Constant { m }),
            superposition: None,
        },
        n_list: (4..=n_top).collect(),
        t_list: vec![t],
        tolerances: Tolerances::default(),
        seed: 1,
        output: OutputSpec::default(),
    };
    cfg.validate().map_err(|e| e.to_string())?;
    let report = run_sweep(&cfg, &Default::default()).map_err(|e| e.to_string())?;
    let (slope, r2, note) = match report.fits.first() {
        Some(FitOutcome::Fitted { fit, .. }) => (Some(fit.slope), Some(fit.r2), None),
        Some(FitOutcome::ExactRegime { .. }) => (None, None, Some("exact regime: distances vanish".to_string())),
        Some(FitOutcome::Skipped { reason, .. }) => (None, None, Some(reason.clone())),
        None => (None, None, None),
    };
    let points = report.rows.iter().map(|r| SweepPoint { n: r.n, m: r.m, trace_dist: r.trace_dist }).collect();
    serde_json::to_string(&Sweep { family: report.family, points, slope, r2, note }).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Trajectory {
    times: Vec<f64>,
    occupation0: Vec<f64>,
    energy: Vec<f64>,
    norm_drift: f64,
}

/// Hartree evolution of `(cos θ, i sin θ)` on the two-site ring; returns
/// `|φ_t(0)|²` on a uniform grid.
pub fn hartree_json(g: f64, theta: f64, t_end: f64) -> Result<String, String> {
    if !(t_end > 0.0 && t_end <= 50.0) {
        return Err("t_end must lie in (0, 50]".into());
    }
    let ms = ModeSystem::lattice(2, Dispersion::Laplacian { hopping: 1.0 }, PairPotential::Contact { g })
        .map_err(|e| e.to_string())?;
    let phi = meanfield::harness::config::to_dvector(&unit_pair(theta));
    let traj = evolve_hartree(&ms, &phi, &uniform_grid(t_end, t_end / 200.0), DEFAULT_TOL).map_err(|e| e.to_string())?;
    let out = Trajectory {
        occupation0: traj.states.iter().map(|s| s[0].norm_sqr()).collect(),
        energy: traj.energy_log.clone(),
        norm_drift: traj.norm_drift(),
        times: traj.times,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn theta_coefficients(n: usize, m: usize) -> Result<String, JsValue> {
    theta_coefficients_json(n, m).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn convergence(family: &str, g: f64, t: f64, n_top: usize, m: usize, theta: f64) -> Result<String, JsValue> {
    convergence_json(family, g, t, n_top, m, theta).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn hartree(g: f64, theta: f64, t_end: f64) -> Result<String, JsValue> {
    hartree_json(g, theta, t_end).map_err(|e| JsValue::from_str(&e))
}
