//! Acceptance criteria AC1–AC10. One line per criterion; exits nonzero if
//! any fails. Run with `cargo test -p meanfield-core --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use meanfield::harness::report::{ConvergenceReport, FitOutcome, Metric, RateFit};
use meanfield::harness::suite::{self, CheckResult};
use meanfield::harness::{run_sweep, ExperimentConfig, RunOptions};

const SEED: u64 = 20240611;

struct Verdict {
    id: &'static str,
    title: &'static str,
    passed: bool,
    detail: String,
    runtime_s: f64,
}

fn suites(results: &[CheckResult]) -> (bool, String) {
    let passed = results.iter().all(|r| r.passed);
    let detail = results
        .iter()
        .map(|r| {
            let first = r.failures.first().map(|f| format!(" [{f}]")).unwrap_or_default();
            format!("{} {}/{} worst={:.2e}{first}", r.name, if r.passed { "ok" } else { "FAIL" }, r.checks, r.worst_ratio)
        })
        .collect::<Vec<_>>()
        .join("; ");
    (passed, detail)
}

fn criterion(
    id: &'static str,
    title: &'static str,
    budget_s: Option<f64>,
    body: impl FnOnce() -> (bool, String),
) -> Verdict {
    let start = Instant::now();
    let (mut passed, mut detail) = body();
    let runtime_s = start.elapsed().as_secs_f64();
    if let Some(b) = budget_s {
        if runtime_s >= b {
            passed = false;
            detail.push_str(&format!("; runtime {runtime_s:.1}s over budget {b}s"));
        }
    }
    Verdict { id, title, passed, detail, runtime_s }
}

fn lattice_config(family: &str, g: f64, n_list: &str) -> String {
    let potential =
        if g == 0.0 { r#"{"kind": "none"}"#.to_string() } else { format!(r#"{{"kind": "contact", "g": {g}}}"#) };
    let sched = if family == "theta" { r#", "m_schedule": {"kind": "constant", "m": 1}"# } else { "" };
    format!(
        r#"{{
        "system": {{"geometry": "lattice", "points": 2,
                   "dispersion": {{"kind": "laplacian", "hopping": 1.0}},
                   "potential": {potential}}},
        "state": {{"family": "{family}", "phi": [[0.8, 0.0], [0.0, 0.6]]{sched}}},
        "n_list": {n_list},
        "t_list": [0.5],
        "seed": {SEED}
    }}"#
    )
}

fn sweep(text: &str, threads: usize) -> Result<ConvergenceReport, String> {
    let cfg = ExperimentConfig::from_json(text).map_err(|e| e.to_string())?;
    run_sweep(&cfg, &RunOptions { threads, timing: false }).map_err(|e| e.to_string())
}

fn fitted(report: &ConvergenceReport) -> Option<RateFit> {
    report.fits.iter().find_map(|f| match f {
        FitOutcome::Fitted { fit, .. } => Some(*fit),
        _ => None,
    })
}

fn strictly_decreasing(report: &ConvergenceReport, metric: Metric) -> bool {
    report.rows.windows(2).all(|w| w[1].metric(metric) < w[0].metric(metric))
}

const SCALING_N: &str = "[4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14]";

/// Decreasing trace distance with slope ≤ −0.4 and r² ≥ 0.9.
fn scaling_verdict(report: Result<ConvergenceReport, String>) -> (bool, String) {
    let report = match report {
        Ok(r) => r,
        Err(e) => return (false, format!("sweep failed: {e}")),
    };
    let dec = strictly_decreasing(&report, Metric::Trace);
    let Some(fit) = fitted(&report) else {
        return (false, "no rate fit".into());
    };
    let first = report.rows.first().map(|r| r.trace_dist).unwrap_or(f64::NAN);
    let last = report.rows.last().map(|r| r.trace_dist).unwrap_or(f64::NAN);
    let ok = dec && fit.slope <= -0.4 && fit.r2 >= 0.9;
    (
        ok,
        format!(
            "{}: decreasing={dec} slope={:.3} r2={:.4} dist {first:.3e} -> {last:.3e}",
            report.family, fit.slope, fit.r2
        ),
    )
}

fn main() -> ExitCode {
    let mut verdicts = Vec::new();

    verdicts.push(criterion("AC1", "algebra suite", Some(30.0), || {
        suites(&[
            suite::ccr_suite(100, SEED),
            suite::adjointness_suite(100, SEED + 1),
            suite::second_quantization_suite(100, SEED + 2),
            suite::operator_bounds_suite(100, SEED + 3),
        ])
    }));

    verdicts.push(criterion("AC2", "Weyl suite", Some(60.0), || suites(&[suite::weyl_suite(30, SEED + 4)])));

    verdicts.push(criterion("AC3", "theta constructions", None, || {
        suites(&[suite::theta_constructions_suite(8, SEED + 5)])
    }));

    verdicts.push(criterion("AC4", "Weyl-shift coefficients", None, || {
        suites(&[suite::weyl_coefficients_suite(&[(6, 1), (6, 2), (8, 1)], SEED + 6)])
    }));

    verdicts.push(criterion("AC5", "Laguerre envelope and moment bound", None, || {
        suites(&[
            suite::laguerre_envelope_suite(500, SEED + 7),
            suite::number_moment_bound_suite(&[50, 200, 800, 3200]),
        ])
    }));

    verdicts.push(criterion("AC6", "Hartree conservation", None, || suites(&[suite::conservation_suite(20, SEED + 8)])));

    verdicts.push(criterion("AC7", "theta scaling", Some(300.0), || {
        scaling_verdict(sweep(&lattice_config("theta", 1.0, SCALING_N), 1))
    }));

    verdicts.push(criterion("AC8", "product/coherent baselines and free control", None, || {
        let (p_ok, p) = scaling_verdict(sweep(&lattice_config("product", 1.0, SCALING_N), 1));
        let (c_ok, c) = scaling_verdict(sweep(&lattice_config("coherent", 1.0, SCALING_N), 1));
        let mut worst = 0.0f64;
        let mut free_ok = true;
        for family in ["product", "coherent"] {
            match sweep(&lattice_config(family, 0.0, SCALING_N), 1) {
                Ok(r) => {
                    for row in &r.rows {
                        worst = worst.max(row.trace_dist);
                    }
                }
                Err(_) => free_ok = false,
            }
        }
        let free_ok = free_ok && worst <= 1e-12;
        (p_ok && c_ok && free_ok, format!("{p}; {c}; free control max dist {worst:.2e}"))
    }));

    verdicts.push(criterion("AC9", "superposition scaling", Some(600.0), || {
        let s3 = 3f64.sqrt() / 2.0;
        let w = 1.0 / 2f64.sqrt();
        let mut ok = true;
        let mut detail = Vec::new();
        for kind in ["phi", "psi"] {
            let text = format!(
                r#"{{
                "system": {{"geometry": "lattice", "points": 2,
                           "dispersion": {{"kind": "laplacian", "hopping": 1.0}},
                           "potential": {{"kind": "contact", "g": 1.0}}}},
                "state": {{"family": "superposition", "superposition": {{"kind": "{kind}",
                    "coeffs": [[{w}, 0], [{w}, 0]],
                    "family": [[[1, 0], [0, 0]], [[0.5, 0], [{s3}, 0]]]}}}},
                "n_list": [4, 6, 8, 10, 12, 16, 20, 24, 32, 40],
                "t_list": [0.5],
                "seed": {SEED}
            }}"#
            );
            let report = match sweep(&text, 1) {
                Ok(r) => r,
                Err(e) => {
                    ok = false;
                    detail.push(format!("{kind}: {e}"));
                    continue;
                }
            };
            let dec = strictly_decreasing(&report, Metric::HilbertSchmidt);
            let closed = |n: usize| if kind == "phi" { 0.5f64.powi(n as i32) } else { (-(n as f64) / 2.0).exp() };
            let cross_err = report
                .rows
                .iter()
                .map(|r| (r.cross_term.unwrap_or(f64::NAN) - closed(r.n)).abs())
                .fold(0.0, f64::max);
            let last = report.weights.last().expect("weight rows");
            let weight_err = last
                .fitted
                .iter()
                .zip(&last.limit)
                .map(|(f, l)| (f - l).abs())
                .fold(0.0, f64::max);
            let expected_limit = last.limit.iter().all(|l| (l - 0.5).abs() < 1e-15);
            let this = dec && cross_err <= 1e-8 && weight_err < 0.005 && expected_limit;
            ok &= this;
            detail.push(format!(
                "{kind}: decreasing={dec} hs {:.2e} -> {:.2e} cross_err={cross_err:.1e} weights {:?} vs {:?}",
                report.rows[0].hs_dist,
                report.rows.last().unwrap().hs_dist,
                last.fitted.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>(),
                last.limit
            ));
        }
        (ok, detail.join("; "))
    }));

    verdicts.push(criterion("AC10", "determinism", None, || {
        let text = lattice_config("theta", 1.0, SCALING_N);
        match (sweep(&text, 1), sweep(&text, 1), sweep(&text, 4)) {
            (Ok(a), Ok(b), Ok(c)) => {
                let (a, b, c) = (a.to_csv_string(), b.to_csv_string(), c.to_csv_string());
                (
                    a == b && a == c,
                    format!("{} bytes, single-thread identical={}, 4-thread identical={}", a.len(), a == b, a == c),
                )
            }
            _ => (false, "sweep failed".into()),
        }
    }));

    let mut all = true;
    for v in &verdicts {
        all &= v.passed;
        println!(
            "{} {} {} ({:.2}s): {}",
            if v.passed { "PASS" } else { "FAIL" },
            v.id,
            v.title,
            v.runtime_s,
            v.detail
        );
    }
    println!("{}", if all { "all acceptance criteria passed" } else { "acceptance FAILED" });
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
