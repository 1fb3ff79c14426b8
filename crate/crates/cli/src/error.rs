use ship_core::ShipError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Ship(#[from] ShipError),
}

impl CliError {
    /// Process exit status: 1 usage, 2 data or validation, 3 divergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Ship(ShipError::Diverged { .. }) => 3,
            CliError::Ship(_) => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
