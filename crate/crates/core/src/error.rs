//! Error type shared by all modules.

/// Everything that can go wrong in this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A geometric operation was asked of an empty set.
    #[error("operation on an empty feasible set")]
    EmptySet,
    /// A running intersection became empty: the data contradict the
    /// assumed noise bounds at this node and instant.
    #[error("feasible set became empty at node {node}, instant {instant}")]
    InfeasibleAt { node: usize, instant: u64 },
    /// Vector dimensions do not agree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    /// An iterative routine ran out of budget.
    #[error("{context} did not converge within {limit} iterations")]
    NoConvergence { context: &'static str, limit: usize },
    /// A size or index is out of range for the structure at hand.
    #[error("invalid size: {0}")]
    InvalidSize(String),
    /// An operation that needs a symmetric graph got a directed one.
    #[error("graph is not symmetric")]
    AsymmetricGraph,
    /// A per-node batch does not have one entry per node.
    #[error("batch size mismatch: expected {expected} entries, got {got}")]
    BatchSizeMismatch { expected: usize, got: usize },
    /// A measurement was offered to a node it does not belong to.
    #[error("measurement belongs to node {got}, expected node {expected}")]
    WrongNode { expected: usize, got: usize },
    /// A vector is structurally unusable (empty, non-finite, or zero
    /// where a direction is required).
    #[error("invalid vector: {0}")]
    InvalidVector(&'static str),
    /// A configuration value is out of contract.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
