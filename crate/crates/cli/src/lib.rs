//! Batch driver for the `tempora` toolkit: configuration, pipelines, reports
//! and the acceptance self-test.

pub mod config;
pub mod pipelines;
pub mod report;
pub mod selftest;

use std::path::PathBuf;

pub use config::{GridParams, Model, Pipeline, RunConfig};
pub use pipelines::run;
pub use report::{Check, Report, Table};
pub use selftest::{run_criterion, selftest, Criterion, Outcome, CRITERIA};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{stage} failed: {source}")]
    Module {
        stage: &'static str,
        #[source]
        source: tempora::Error,
    },

    #[error(transparent)]
    Core(#[from] tempora::Error),
}

pub type CliResult<T> = Result<T, CliError>;
