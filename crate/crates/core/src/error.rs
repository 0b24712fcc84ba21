use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("node index {0} is out of range")]
    InvalidNode(usize),
    #[error("invalid ring size {0}; expected a multiple of 0.5 that is at least 1")]
    InvalidRing(f64),
    #[error("no element contains point ({:.6}, {:.6}, {:.6})", .0[0], .0[1], .0[2])]
    NotFound([f64; 3]),
    #[error("input contains non-finite values")]
    NonFinite,
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("normal vector is degenerate")]
    DegenerateNormal,
    #[error("stencil has {available} nodes but at least {required} are needed")]
    InsufficientStencil { required: usize, available: usize },
    #[error("WLS-ENO weights need field context")]
    MissingContext,
    #[error("point is not on the unit sphere")]
    NotOnSphere,
    #[error("errors must be strictly positive and node counts increasing")]
    NonPositiveError,
    #[error("integration needs a closed sphere mesh")]
    OpenMesh,
    #[error("target node {node}: {source}")]
    AtTarget { node: usize, source: Box<Error> },
    #[error("transfer step {step}: {source}")]
    AtStep { step: usize, source: Box<Error> },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn at_target(self, node: usize) -> Self {
        Error::AtTarget { node, source: Box::new(self) }
    }

    pub fn at_step(self, step: usize) -> Self {
        Error::AtStep { step, source: Box::new(self) }
    }

    /// True for errors caused by bad input or configuration rather than a
    /// numerical breakdown.
    pub fn is_configuration(&self) -> bool {
        match self {
            Error::Config(_)
            | Error::Parse(_)
            | Error::Io(_)
            | Error::InvalidMesh(_)
            | Error::InvalidNode(_)
            | Error::InvalidRing(_)
            | Error::DimensionMismatch { .. } => true,
            Error::AtTarget { source, .. } | Error::AtStep { source, .. } => {
                source.is_configuration()
            }
            _ => false,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
