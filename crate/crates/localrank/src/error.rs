use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("node id {id} out of range (graph has {node_count} nodes)")]
    InvalidNode { id: usize, node_count: usize },

    #[error("duplicate arc ({src}, {dst})")]
    DuplicateArc { src: usize, dst: usize },

    #[error("{path}:{line}: {msg}")]
    ParseFile {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("kernel set must not be empty")]
    EmptyKernel,

    #[error("target {0} is not a kernel node")]
    TargetNotInKernel(usize),

    #[error("target list must be nonempty and free of duplicates")]
    BadTargets,

    #[error("node ids of the visit subgraph do not name nodes of the graph")]
    NodeUniverseMismatch,

    #[error("union of visit subgraphs violates the visit-subgraph invariants: {0}")]
    UnionStructure(String),

    #[error("query {query} not allowed by the session's exploration model")]
    ModelViolation { query: &'static str },

    #[error("node {id} has not been discovered in this session")]
    Undiscovered { id: usize },

    #[error("unknown target id {0}")]
    UnknownTarget(usize),

    #[error("verdict has no failing condition; nothing to witness")]
    NoFailingCondition,

    #[error("witness growth cap of {cap} nodes exceeded (condition likely fails with equality)")]
    WitnessCapExceeded { cap: usize },

    #[error("graph with {size} searchable nodes exceeds the subset-search budget of {budget}")]
    SearchBudgetExceeded { size: usize, budget: usize },

    #[error("rational solve refused: strongly connected component of size {size} exceeds cap {cap}")]
    SolveCapExceeded { size: usize, cap: usize },

    #[error("dangling source nodes present; split them off before reducing")]
    DanglingSource,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
