use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use meanfield::harness::report::{fit_all, parse_csv, times, ConvergenceReport, FitOutcome, Metric};
use meanfield::harness::{
    run_convergence_sweep, run_invariant_suite, run_superposition_sweep, ExperimentConfig, Family, Level, RunOptions,
};
use meanfield::hartree::{evolve_hartree, uniform_grid};
use meanfield::Error;

#[derive(Parser)]
#[command(name = "meanfield", version, about = "Mean-field convergence experiments for bosonic Fock states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory; results go to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Run the invariant suites.
    Check {
        #[arg(long, value_enum, default_value_t = LevelArg::Quick)]
        level: LevelArg,
    },
    /// Single-state convergence sweep (product, coherent or theta).
    Converge {
        #[arg(long)]
        config: PathBuf,
        /// Record per-row wall-clock time (breaks byte-reproducibility).
        #[arg(long)]
        timing: bool,
    },
    /// Superposition sweep against the weighted mixture.
    Superpose {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        timing: bool,
    },
    /// Export the Hartree trajectory of the configured state.
    Hartree {
        #[arg(long)]
        config: PathBuf,
        /// Sampling step of the exported grid.
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
    },
    /// Fit log-log rates to an existing sweep CSV.
    Fit {
        /// CSV written by `converge` or `superpose`.
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = MetricArg::Trace)]
        metric: MetricArg,
        /// Fit only this time.
        #[arg(long)]
        t: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Trace,
    Hs,
    Op,
}

/// Exit status, by failure class.
enum Failure {
    Invariant(String),
    Config(String),
    Capacity(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invariant(_) => 1,
            Failure::Config(_) => 2,
            Failure::Capacity(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Invariant(s) | Failure::Config(s) | Failure::Capacity(s) => s,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Capacity { .. } => Failure::Capacity(e.to_string()),
            Error::Config(_) | Error::Json(_) => Failure::Config(e.to_string()),
            _ => Failure::Invariant(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Writes to `<out>/<name>` or stdout.
fn emit(out: Option<&Path>, name: &str, body: &str) -> Outcome {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Failure::Config(format!("{}: {e}", dir.display())))?;
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes()).map_err(|e| Failure::Invariant(e.to_string()))?;
        }
    }
    Ok(())
}

fn summarize(report: &ConvergenceReport) {
    for f in &report.fits {
        match f {
            FitOutcome::Fitted { t, fit } => {
                eprintln!("t = {t}: slope {:.4}, intercept {:.4}, r2 {:.4}", fit.slope, fit.intercept, fit.r2)
            }
            FitOutcome::ExactRegime { t, .. } => eprintln!("t = {t}: exact regime (distances at machine precision)"),
            FitOutcome::Skipped { t, reason } => eprintln!("t = {t}: no fit ({reason})"),
        }
    }
}

fn write_report(cli: &Cli, cfg: &ExperimentConfig, report: &ConvergenceReport) -> Outcome {
    summarize(report);
    let out = cli.out.as_deref().or(cfg.output.dir.as_deref().map(Path::new));
    let stem = cfg.output.stem.clone().unwrap_or_else(|| report.family.clone());
    match cli.format {
        Format::Csv => emit(out, &format!("{stem}.csv"), &report.to_csv_string()),
        Format::Json => emit(out, &format!("{stem}.json"), &report.to_json()),
    }
}

fn sweep(cli: &Cli, config: &Path, timing: bool, superpose: bool) -> Outcome {
    let cfg = load_config(config, cli.seed)?;
    let is_sup = cfg.state.family == Family::Superposition;
    if is_sup != superpose {
        let want = if superpose { "superpose needs a superposition family" } else { "use superpose for superpositions" };
        return Err(Failure::Config(want.into()));
    }
    let opts = RunOptions { threads: cli.threads.max(1), timing };
    let report =
        if superpose { run_superposition_sweep(&cfg, &opts)? } else { run_convergence_sweep(&cfg, &opts)? };
    write_report(cli, &cfg, &report)
}

fn check(cli: &Cli, level: LevelArg) -> Outcome {
    let level = match level {
        LevelArg::Quick => Level::Quick,
        LevelArg::Full => Level::Full,
    };
    let report = run_invariant_suite(level, cli.seed.unwrap_or(0));
    for s in &report.suites {
        eprintln!(
            "{} {:<22} {:>6} checks  worst/tol {:.2e}  {:.2}s",
            if s.passed { "ok  " } else { "FAIL" },
            s.name,
            s.checks,
            s.worst_ratio,
            s.runtime_s
        );
        for f in &s.failures {
            eprintln!("       {f}");
        }
    }
    let body = match cli.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => {
            let mut s = String::from("suite,passed,checks,worst_ratio,runtime_s\n");
            for r in &report.suites {
                s.push_str(&format!("{},{},{},{:?},{:?}\n", r.name, r.passed, r.checks, r.worst_ratio, r.runtime_s));
            }
            s
        }
    };
    let ext = match cli.format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    emit(cli.out.as_deref(), &format!("check.{ext}"), &body)?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Invariant("invariant suite failed".into()))
    }
}

fn hartree(cli: &Cli, config: &Path, dt: f64) -> Outcome {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Failure::Config(format!("dt = {dt} must be positive")));
    }
    let cfg = load_config(config, cli.seed)?;
    if cfg.state.family == Family::Superposition {
        return Err(Failure::Config("hartree export takes a single reference state".into()));
    }
    let ms = cfg.system.build(cfg.seed)?;
    let phi = cfg.phi()?;
    let t_end = cfg.t_list.iter().fold(0.0f64, |a, t| a.max(t.abs()));
    if t_end == 0.0 {
        return Err(Failure::Config("t_list must reach beyond t = 0".into()));
    }
    let traj = evolve_hartree(&ms, &phi, &uniform_grid(t_end, dt), cfg.tolerances.hartree)?;
    eprintln!("norm drift {:.2e}, energy drift {:.2e}, {} steps", traj.norm_drift(), traj.energy_drift(), traj.steps);
    let out = cli.out.as_deref().or(cfg.output.dir.as_deref().map(Path::new));
    match cli.format {
        Format::Csv => {
            let mut buf = Vec::new();
            traj.write_csv(&mut buf)?;
            emit(out, "hartree.csv", &String::from_utf8(buf).expect("ascii output"))
        }
        Format::Json => {
            let states: Vec<Vec<[f64; 2]>> =
                traj.states.iter().map(|s| s.iter().map(|z| [z.re, z.im]).collect()).collect();
            let body = json!({
                "config_hash": cfg.hash(),
                "times": traj.times,
                "states": states,
                "norm": traj.norm_log,
                "energy": traj.energy_log,
                "steps": traj.steps,
            });
            emit(out, "hartree.json", &(serde_json::to_string_pretty(&body).expect("json") + "\n"))
        }
    }
}

fn fit(cli: &Cli, input: &Path, metric: MetricArg, only: Option<f64>) -> Outcome {
    let text = fs::read_to_string(input).map_err(|e| Failure::Config(format!("{}: {e}", input.display())))?;
    let rows = parse_csv(&text, "").map_err(|e| Failure::Config(e.to_string()))?;
    let metric = match metric {
        MetricArg::Trace => Metric::Trace,
        MetricArg::Hs => Metric::HilbertSchmidt,
        MetricArg::Op => Metric::Operator,
    };
    if let Some(t) = only {
        if !times(&rows).contains(&t) {
            return Err(Failure::Config(format!("no rows at t = {t}")));
        }
    }
    let fits: Vec<FitOutcome> = fit_all(&rows, metric)
        .into_iter()
        .filter(|f| {
            let t = match f {
                FitOutcome::Fitted { t, .. } | FitOutcome::ExactRegime { t, .. } | FitOutcome::Skipped { t, .. } => *t,
            };
            only.is_none_or(|o| o == t)
        })
        .collect();
    let body = match cli.format {
        Format::Json => serde_json::to_string_pretty(&fits).expect("json") + "\n",
        Format::Csv => {
            let mut s = String::from("t,outcome,slope,intercept,r2\n");
            for f in &fits {
                match f {
                    FitOutcome::Fitted { t, fit } => {
                        s.push_str(&format!("{t:?},fitted,{:?},{:?},{:?}\n", fit.slope, fit.intercept, fit.r2))
                    }
                    FitOutcome::ExactRegime { t, .. } => s.push_str(&format!("{t:?},exact_regime,,,\n")),
                    FitOutcome::Skipped { t, .. } => s.push_str(&format!("{t:?},skipped,,,\n")),
                }
            }
            s
        }
    };
    let ext = match cli.format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    emit(cli.out.as_deref(), &format!("fit.{ext}"), &body)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check { level } => check(&cli, *level),
        Command::Converge { config, timing } => sweep(&cli, config, *timing, false),
        Command::Superpose { config, timing } => sweep(&cli, config, *timing, true),
        Command::Hartree { config, dt } => hartree(&cli, config, *dt),
        Command::Fit { input, metric, t } => fit(&cli, input, *metric, *t),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
