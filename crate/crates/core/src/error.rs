use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("edge ({0},{0}) is a self-loop")]
    SelfLoop(usize),
    #[error("edge ({i},{j}) given more than once")]
    DuplicateEdge { i: usize, j: usize },
    #[error("edge ({i},{j}) has nonpositive length {length}")]
    NonPositiveLength { i: usize, j: usize, length: f64 },
    #[error("edge ({i},{j}) has negative conductivity {conductivity}")]
    NegativeConductivity {
        i: usize,
        j: usize,
        conductivity: f64,
    },
    #[error("edge ({i},{j}) references a vertex outside 0..{n}")]
    UnknownVertex { i: usize, j: usize, n: usize },
    #[error("partition does not cover the vertex set: {0}")]
    InvalidPartition(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("sources are not balanced: sum = {sum:e}")]
    IncompatibleSources { sum: f64 },
    #[error("vertices carrying sources are split across disconnected components: {components:?}")]
    DisconnectedSupport { components: Vec<Vec<usize>> },
    #[error("linear solve did not reach tolerance: residual {residual:e} > {target:e}")]
    SolverNotConverged { residual: f64, target: f64 },
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("gradient requested on edge {edge} with zero conductivity and gamma < 1")]
    GradientSingularity { edge: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "step size fell below {min_tau:e} without satisfying the sufficient-decrease condition"
    )]
    StepFailure { min_tau: f64 },
    #[error("pruning disconnects source-carrying vertices: {components:?}")]
    ConnectivityViolation { components: Vec<Vec<usize>> },
    #[error("cut bound not applicable: net source flux across the cut is zero")]
    BoundNotApplicable,
    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("geometry: {0}")]
    Geometry(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::SelfLoop(_)
            | Error::DuplicateEdge { .. }
            | Error::NonPositiveLength { .. }
            | Error::NegativeConductivity { .. }
            | Error::UnknownVertex { .. }
            | Error::InvalidPartition(_)
            | Error::DimensionMismatch { .. } => "graph",
            Error::IncompatibleSources { .. }
            | Error::DisconnectedSupport { .. }
            | Error::SolverNotConverged { .. }
            | Error::NonFinite(_) => "solver",
            Error::GradientSingularity { .. } | Error::InvalidParameter(_) => "parameter",
            Error::StepFailure { .. }
            | Error::ConnectivityViolation { .. }
            | Error::BoundNotApplicable => "dynamics",
            Error::AtIteration { source, .. } => source.kind(),
            Error::Geometry(_) => "geometry",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Parse { .. } => "parse",
        }
    }
}
