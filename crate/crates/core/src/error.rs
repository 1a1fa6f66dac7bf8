use std::path::PathBuf;

use crate::graph::NodeId;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum SpnError {
    #[error("malformed graph at node {node}: {reason}")]
    MalformedGraph { node: NodeId, reason: String },

    #[error("sum node {node} has no strictly positive weight")]
    DegenerateNode { node: NodeId },

    #[error("pruning would remove every child of the root")]
    DegenerateModel,

    #[error("evidence has {found} entries but the network has {expected} variables")]
    EvidenceLength { expected: usize, found: usize },

    #[error("invalid observation for variable {var}: {reason}")]
    InvalidObservation { var: usize, reason: String },

    #[error("evidence has zero probability under the network")]
    ZeroEvidence,

    #[error("network is not valid: {0}")]
    InvalidNetwork(String),

    #[error("oracle capacity exceeded ({limit} monomials or states)")]
    OracleCapacity { limit: usize },

    #[error("architecture too large: estimated {estimated} edges exceeds cap {limit}")]
    Capacity { estimated: usize, limit: usize },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },

    #[error("model file line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("training diverged: average log-likelihood is NaN at epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = SpnError> = std::result::Result<T, E>;
