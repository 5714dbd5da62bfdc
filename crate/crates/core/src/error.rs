use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(
        "{what} needs {needed}, above the budget of {budget} (raise DIMERLOOPS_BUDGET to override)"
    )]
    Budget {
        what: &'static str,
        needed: u128,
        budget: u128,
    },
    #[error("lattice is degenerate (a side of length 2); {0} needs all sides >= 4")]
    Degenerate(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
