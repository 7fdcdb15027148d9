//! Configuration, verification experiments, reports and exports built on
//! `deltaprime-core`.

pub mod config;
pub mod experiments;
pub mod export;
pub mod report;

pub use config::{parse_config, Config, Format, Operator};
pub use report::{Assertion, ExperimentReport, Relation};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error(transparent)]
    Core(#[from] deltaprime_core::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub(crate) fn config(path: &str, message: String) -> Self {
        CliError::Config { path: if path.is_empty() { "<root>".into() } else { path.into() }, message }
    }
}
