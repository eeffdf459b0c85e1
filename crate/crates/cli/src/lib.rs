//! Experiment runner: spec files in, CSV tables and gnuplot data out.

pub mod csv;
pub mod error;
pub mod experiments;
pub mod plotdata;
pub mod spec;
pub mod validate;

pub use csv::Table;
pub use error::{CliError, Result};
pub use experiments::run_experiment;
pub use plotdata::{emit_plotdata, PlotData};
pub use spec::{ExperimentKind, ExperimentSpec};
pub use validate::{run_validation, ValidationSummary};

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "RAFTJAMSEC_THREADS";
