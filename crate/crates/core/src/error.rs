use thiserror::Error;

use crate::graph::Edge;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operation requires an unweighted graph")]
    WeightedInput,

    #[error("operation requires a weighted graph")]
    UnweightedInput,

    #[error("swap {remove} -> {add} is not viable: {reason}")]
    NotViable {
        remove: Edge,
        add: Edge,
        reason: &'static str,
    },

    #[error("vertex {vertex} out of range for graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    /// No vertex has a free in-neighbour, so no move is possible.
    #[error("frozen state: no vertex can start a walk")]
    Frozen,

    #[error("internal invariant violated: {message}")]
    Internal { message: String, walk: Vec<usize> },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("infeasible instance: {0}")]
    Infeasible(String),

    #[error("enumeration cap exceeded: {0}")]
    CapExceeded(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("iterative fit did not converge after {iterations} iterations (discrepancy {discrepancy:e})")]
    NonConvergence { iterations: usize, discrepancy: f64 },

    #[error("undersampled: {total} counts for {states} states (need at least {needed})")]
    Undersampled {
        total: u64,
        states: usize,
        needed: u64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Config(_) | Error::Io(_) | Error::Json(_) => 2,
            Error::Frozen | Error::Infeasible(_) => 3,
            Error::Internal { .. } => 4,
            _ => 2,
        }
    }
}
