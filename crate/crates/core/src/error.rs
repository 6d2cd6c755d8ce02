use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{0}")]
    InvalidParameter(String),

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (estimate {estimate:e}, error estimate {error:e})"
    )]
    Quadrature {
        subdivisions: usize,
        estimate: f64,
        error: f64,
    },

    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    #[error("root bracket failure: {0}")]
    Bracket(String),

    #[error("insufficient activity: {0}")]
    InsufficientActivity(String),
}

pub type Result<T> = std::result::Result<T, Error>;
