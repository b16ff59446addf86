//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The directed part of a graph contains a cycle.
    #[error("directed cycle detected")]
    CycleDetected,
    /// A DAG was required but the graph still has undirected edges.
    #[error("graph has undirected edges where a DAG was required")]
    UndirectedEdges,
    /// A brute-force routine was asked for more nodes than it supports.
    #[error("node count {n} exceeds cap {cap}")]
    CapExceeded { n: usize, cap: usize },
    /// The essential-DAG count provider has no value for this node count.
    #[error("no essential-DAG count available for n={0}")]
    NotCovered(usize),
    /// A ratio estimate is undefined because a tally in the sample is zero.
    #[error("degenerate sample: {0}")]
    DegenerateSample(&'static str),
    /// An arithmetic identity that must hold exactly did not; this is a bug.
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid canonical key: {0}")]
    InvalidKey(String),
    #[error("invalid count table: {0}")]
    InvalidTable(String),
    /// Sample records must all share one node count.
    #[error("records mix node counts {0} and {1}")]
    MixedSampleN(usize, usize),
    #[error("empty sample")]
    EmptySample,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
