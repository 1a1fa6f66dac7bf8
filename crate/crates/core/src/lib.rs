//! Sum-product networks: construction, validity checking, exact inference
//! in time linear in network size, weight learning, dense architecture
//! generation and image completion experiments.
//!
//! Networks are immutable node tables in topological order (children
//! before parents). All inference runs in log space.

pub mod error;
pub mod graph;
pub mod harness;
pub mod inference;
pub mod learning;
pub mod oracle;
pub mod structure;

pub use error::{Result, SpnError};
pub use graph::{
    check_validity, compute_scopes, normalize_weights, validate, Node, NodeId, Spn, SpnBuilder,
    ValidityReport, VarKind, VariableTable, FALSE, TRUE,
};
pub use inference::{
    evaluate, log_partition, marginals, mpe, weight_gradients, Evidence, Marginals, MpeMode,
    MpeResult, Obs,
};
pub use learning::{prune_zero_weights, train, TrainConfig, TrainLog, TrainMode};
