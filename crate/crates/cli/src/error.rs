use std::process::ExitCode;

use igc_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    /// Output was written but a convergence diagnostic failed.
    #[error("{0}")]
    Diagnostic(String),
}

impl CliError {
    /// 2 configuration or admissibility, 3 integration, 4 convergence
    /// diagnostic.
    pub fn exit_code(&self) -> ExitCode {
        let code = match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Diagnostic(_) => 4,
            CliError::Core(e) => match e {
                CoreError::PlateauFailure { .. } => 4,
                CoreError::ManifoldBoundary { .. }
                | CoreError::InvalidIntegration(_)
                | CoreError::SingularMetric(_)
                | CoreError::DegenerateBasis(_) => 3,
                _ => 2,
            },
        };
        ExitCode::from(code)
    }
}
