use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("polytope is empty")]
    EmptyPolytope,

    #[error("polytope is unbounded")]
    Unbounded,

    #[error("LP exceeded its iteration limit of {0} pivots")]
    IterationLimit(usize),

    #[error("input exceeds the exact-oracle size guard: {0}")]
    OracleScale(String),

    #[error("point set does not span its ambient space")]
    LowerDimensional,

    #[error("constraint row {0} has an all-zero normal")]
    ZeroRow(usize),

    #[error("ramp constraints are undefined on the stacked charge/discharge space")]
    UnsupportedSpace,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("load {index}: {source}")]
    Load { index: usize, source: Box<Error> },

    #[error("dispatch infeasible: power balance cannot be met in period {period}")]
    InfeasibleDispatch { period: usize },
}

impl Error {
    pub fn for_load(index: usize, source: Error) -> Self {
        Error::Load {
            index,
            source: Box::new(source),
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Innermost error, looking through load-index wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Load { source, .. } => source.root(),
            other => other,
        }
    }
}
