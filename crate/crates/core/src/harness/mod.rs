//! Seeded Monte-Carlo evaluation of the correction methods.

mod config;
mod emit;
mod sweep;
mod trial;

pub use config::{ExperimentConfig, Method};
pub use emit::{
    read_csv, read_json, read_rows_from_path, rows_from_reports, write_csv, write_json, write_rows_to_path, Format,
    ReportRow, CSV_COLUMNS,
};
pub use sweep::{run_sweep, CellDelta, CellFailure, SweepOutcome, SweepSpec};
pub use trial::{
    run_experiment, run_method, run_trial, summarize, trial_graph, trial_rng, Aggregate, EdgeError, MethodFlags,
    MethodSummary, TrialReport,
};
