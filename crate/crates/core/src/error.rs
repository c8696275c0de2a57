use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("no convergence after {sweeps} sweeps (last change {last_change:.3e})")]
    NoConvergence { sweeps: usize, last_change: f64 },
    #[error(
        "nesting violation at iteration {iteration}, time index {time_index}, node {node}: {amount:.3e}"
    )]
    NestingViolation {
        iteration: usize,
        time_index: usize,
        node: usize,
        amount: f64,
    },
    #[error("assertion failed: {0}")]
    AssertionFailure(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Range(_) => 2,
            _ => 1,
        }
    }
}
