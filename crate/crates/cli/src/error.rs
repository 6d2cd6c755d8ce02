use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config entries or parameter values.
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
    #[error("analytic and Monte Carlo values disagree: |z| = {z:.3} exceeds {limit}")]
    Disagreement { z: f64, limit: f64 },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Disagreement { .. } => 3,
            CliError::Failed(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<blockcorr::Error> for CliError {
    fn from(e: blockcorr::Error) -> Self {
        match e {
            blockcorr::Error::InvalidParameter(_) | blockcorr::Error::Domain(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Failed(format!("csv: {e}"))
    }
}
