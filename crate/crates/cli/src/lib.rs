//! Experiment driver for the `vqsd` library: JSON configs in, CSV and JSON
//! artifacts out.

pub mod config;
pub mod run;
pub mod validate;

pub use config::ExperimentConfig;
pub use run::{run, write_artifacts, Artifacts};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad config, flags or input files. Exit code 1.
    #[error("{0}")]
    Config(String),
    /// Failure while running an experiment or writing output. Exit code 2.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<vqsd::VqsdError> for CliError {
    fn from(e: vqsd::VqsdError) -> Self {
        CliError::Runtime(e.to_string())
    }
}
