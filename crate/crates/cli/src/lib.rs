//! Config-driven runner around `fidsim-core`: presets, artifact files and
//! the `fidsim` command line.

pub mod config;
pub mod presets;
pub mod runner;

pub use config::{ExperimentConfig, Method};
pub use presets::{preset, PRESETS};
pub use runner::{build_table, diagnose, run, Diagnosis, RunOutcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] fidsim_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 configuration, 3 resource cap, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        use fidsim_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Core(E::ResourceCap(_)) => 3,
            CliError::Core(E::NumericalFailure(_) | E::FitFailure(_)) => 4,
            CliError::Core(_) => 2,
        }
    }
}
