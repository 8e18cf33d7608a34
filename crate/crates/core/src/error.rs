use thiserror::Error;

/// Errors produced by the mesh, geometry and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("expected {expected} vertices, found {found}")]
    WrongArity { expected: usize, found: usize },

    #[error("non-finite coordinate")]
    NonFinite,

    #[error("degenerate simplex")]
    DegenerateSimplex,

    #[error("degenerate facet {0}: altitude undefined")]
    DegenerateFacet(usize),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("vertex index {index} out of range (mesh has {count} points)")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("duplicate points {0} and {1}")]
    DuplicatePoints(usize, usize),

    #[error("empty mesh")]
    EmptyMesh,

    #[error("too few points: need at least {needed}, found {found}")]
    TooFewPoints { needed: usize, found: usize },

    #[error("points are affinely dependent")]
    AffinelyDependent,

    #[error("desk-scale limit exceeded: {0}")]
    LimitExceeded(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mesh has no interior vertex")]
    NoInteriorVertex,

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("box too small to contain a lattice cell")]
    BoxTooSmall,

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
