use thiserror::Error;

/// Errors surfaced by every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("capacity exceeded: {what} ({count} > cap {cap})")]
    Capacity {
        what: &'static str,
        count: u128,
        cap: u128,
    },

    #[error("no feasible candidate: required mass {required}, max achievable mass {max_mass}")]
    Infeasible { required: f64, max_mass: f64 },

    #[error("degenerate probe: {0}")]
    DegenerateProbe(String),

    #[error("divergent size: {0}")]
    Divergent(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
