use std::path::Path;

use thiserror::Error;

/// Everything a command can fail with, mapped onto process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Core(#[from] kmmeans::Error),
    #[error("{0}")]
    Output(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Data(format!("{}: {e}", path.display()))
    }

    pub fn csv(e: csv::Error) -> Self {
        CliError::Data(e.to_string())
    }

    pub fn write(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        use kmmeans::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(
                E::InvalidArgument(_) | E::ZeroClusters | E::InfeasibleSeparation { .. } | E::InfeasibleRate { .. },
            ) => 2,
            CliError::Data(_) | CliError::Core(_) | CliError::Output(_) => 3,
        }
    }
}

impl From<crate::transform::TransformError> for CliError {
    fn from(e: crate::transform::TransformError) -> Self {
        use crate::transform::TransformError as T;
        match e {
            T::InvalidTheta(_) | T::WidthMismatch { .. } => CliError::Usage(e.to_string()),
            T::NonPositiveForLog(_) | T::ZeroVariance(_) => CliError::Data(e.to_string()),
        }
    }
}
