//! Command-line harness: single runs, replicated experiments, statistics
//! and reports.

pub mod cli;
pub mod experiment;
pub mod report;
pub mod stats;

pub use experiment::{
    bundled_experiment, bundled_experiment_names, resolve_experiment, run_experiment, ExperimentError,
    ExperimentResult, ExperimentSpec, LevelResult,
};
pub use report::{emit_report, rebuild_report, MeasureTable, ReportError};
