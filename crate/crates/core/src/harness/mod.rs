//! Experiment driver: configuration, convergence sweeps, invariant suites
//! and result persistence.

pub mod config;
pub mod report;
pub mod suite;
pub mod sweep;

pub use config::{ExperimentConfig, Family, MSchedule, OutputSpec, StateSpec, SuperpositionConfig, SystemSpec, Tolerances};
pub use report::{
    fit_rate, merge_reports, parse_csv, write_csv, ConvergenceReport, FitOutcome, Metric, RateFit, ReportRow, WeightRow,
    CSV_HEADER, EXACT_THRESHOLD,
};
pub use sweep::{run_convergence_sweep, run_superposition_sweep, run_sweep, RunOptions};
pub use suite::{ccr_suite_with_rule, run_invariant_suite, CheckResult, Level, SuiteReport};
