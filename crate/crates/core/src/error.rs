use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by graph construction, path extraction and instance ingestion.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("graph is not connected ({components} components)")]
    DisconnectedGraph { components: usize },
    #[error("edge ({u}, {v}) has non-positive or non-finite weight {weight}")]
    NonPositiveWeight { u: u64, v: u64, weight: f64 },
    #[error("duplicate edge ({u}, {v})")]
    DuplicateEdge { u: u64, v: u64 },
    #[error("self-loop on vertex {0}")]
    SelfLoop(u64),
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("source and target are the same vertex ({0})")]
    SameEndpoints(usize),
    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("unknown vertex label {0}")]
    UnknownLabel(u64),
    #[error("support is not a simple s-t path: {0}")]
    NotAPath(String),
    #[error("not a tree: {0}")]
    NotATree(String),
    #[error("path endpoints ({found_s}, {found_t}) do not match ({s}, {t})")]
    EndpointMismatch {
        s: usize,
        t: usize,
        found_s: usize,
        found_t: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("edge references unknown node {0}")]
    DanglingEdge(u64),
    #[error("image is {width}x{height}, need at least 2x2")]
    ImageTooSmall { width: usize, height: usize },
    #[error("bad pixel data: {0}")]
    BadPixelFormat(String),
    #[error("giant component target {target} not reached after {steps} radius steps")]
    TargetUnreachable { target: f64, steps: usize },
    #[error("simultaneous events at lambda = {lambda:e} on indices {indices:?} (strict mode)")]
    SimultaneousTieUnresolved { lambda: f64, indices: Vec<usize> },
    #[error("active set does not form two disjoint terminal trees: {0}")]
    InconsistentTrees(String),
    #[error("edge {0} is not in either terminal tree")]
    EdgeNotActive(usize),
    #[error("active set of size {active} has rank {rank}")]
    RankDeficient { rank: usize, active: usize },
    #[error("property check '{check}' failed at breakpoint {breakpoint}: {detail}")]
    PropertyViolation {
        check: String,
        breakpoint: usize,
        detail: String,
    },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
