//! Experiment harness: plain-text configuration, seeded tuning sweeps,
//! prebuilt experiment suites, and deterministic CSV export.
//!
//! Everything here is reproducible by construction — sweeps derive one
//! random stream per method from the master seed, and the CSV writers emit
//! byte-identical output for identical inputs.

pub mod config;
pub mod csvout;
pub mod suites;
pub mod sweep;

pub use config::{
    log_grid, AlignmentSpec, ExperimentConfig, ExperimentKind, FlowSpec, GameSpec, GridSpec,
    LyapunovSpec, OgdaSpec, ParamSpec, SpectraSpec,
};
pub use suites::{
    alignment_experiment, build_alignment_game, cost_table, fit_rate_window, lyapunov_decay,
    ogda_failure_suite, rate_validation, AlignmentAngleResult, CostRow, LyapunovOutcome,
    OgdaCell, OgdaFailureReport, OgdaMethodSummary, RateValidation, OGDA_SUITE_METHODS,
};
pub use sweep::{best_per_method, default_start, fnv1a64, run_sweep, RunResult, SweepSpec};
