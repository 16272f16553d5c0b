//! Experiment harness: configured suites, averaged timings, speed-ups and
//! CSV output.

mod config;
mod output;
mod run;

pub use config::{ExperimentConfig, MethodSpec, ProblemSpec, StopSpec};
pub use output::{
    emit_outputs, read_summary_csv, sanitize_label, strip_columns, write_curve_csv,
    write_summary_csv, write_sweep_csv, TIMING_COLUMNS,
};
pub use run::{
    aggregate, compute_speedup, default_beta_grid, run_experiment, sketch_seed, sweep_beta,
    BenchRow, ExperimentOutcome, RunRecord, SweepPoint,
};

use crate::matrix::MatrixError;
use crate::problems::ProblemError;
use crate::sketch::SketchError;
use crate::solver::SolverError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("config parse error: {0}")]
    TomlDe(#[from] toml::de::Error),
    #[error("config serialization error: {0}")]
    TomlSer(#[from] toml::ser::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("speed-up undefined: reference time {0} is not positive")]
    Speedup(f64),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Sketch(#[from] SketchError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}
