use thiserror::Error;

/// Errors raised by the matrix kernel, the phase functionals and the path
/// tracker.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}x{0} vs {1}x{1}")]
    DimensionMismatch(usize, usize),

    #[error("malformed matrix: {0}")]
    BadShape(String),

    #[error("matrix has a non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),

    #[error("not Hermitian (max |M - M^dagger| = {violation:e})")]
    NotHermitian { violation: f64 },

    #[error("trace is not one (|Tr M - 1| = {violation:e})")]
    TraceNotOne { violation: f64 },

    #[error("not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("not unitary (max |U^dagger U - I| = {violation:e})")]
    NotUnitary { violation: f64 },

    #[error("state vector is zero")]
    ZeroVector,

    #[error("polarization r = {0} outside [-1, 1]")]
    ROutOfRange(f64),

    #[error("spin j = {0} is not a positive half-integer")]
    BadSpin(f64),

    #[error("invalid weights: {0}")]
    BadWeights(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal {off_diagonal:e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("path is not closed")]
    NotClosed,

    #[error("visibility {visibility:e} <= {epsilon:e} at path parameter {parameter}: phase is indeterminate")]
    SingularityOnPath {
        parameter: f64,
        visibility: f64,
        epsilon: f64,
    },

    #[error("phase increment {increment} on segment [{from}, {to}] still >= pi/2 at depth {depth}")]
    RefinementExhausted {
        from: f64,
        to: f64,
        increment: f64,
        depth: usize,
    },

    #[error("winding residual {residual} exceeds {limit} (total phase {total_phase})")]
    ResidualTooLarge {
        total_phase: f64,
        residual: f64,
        limit: f64,
    },

    #[error("circle of radius {radius} around r = {center_r} leaves r in [-1, 1]")]
    RadiusOutOfDomain { center_r: f64, radius: f64 },

    #[error("curve r = {r}: {source}")]
    Curve { r: f64, source: Box<Error> },
}

impl Error {
    /// Short variant name, stable across releases (used on the CLI's stderr).
    pub fn name(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(..) => "DimensionMismatch",
            Error::BadShape(_) => "BadShape",
            Error::NonFinite(..) => "NonFinite",
            Error::NotHermitian { .. } => "NotHermitian",
            Error::TraceNotOne { .. } => "TraceNotOne",
            Error::NotPositive { .. } => "NotPositive",
            Error::NotUnitary { .. } => "NotUnitary",
            Error::ZeroVector => "ZeroVector",
            Error::ROutOfRange(_) => "ROutOfRange",
            Error::BadSpin(_) => "BadSpin",
            Error::BadWeights(_) => "BadWeights",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::InvalidPath(_) => "InvalidPath",
            Error::NotClosed => "NotClosed",
            Error::SingularityOnPath { .. } => "SingularityOnPath",
            Error::RefinementExhausted { .. } => "RefinementExhausted",
            Error::ResidualTooLarge { .. } => "ResidualTooLarge",
            Error::RadiusOutOfDomain { .. } => "RadiusOutOfDomain",
            Error::Curve { source, .. } => source.name(),
        }
    }

    /// True for failures of a computation on valid inputs, as opposed to
    /// rejected inputs.
    pub fn is_computational(&self) -> bool {
        match self {
            Error::SingularityOnPath { .. }
            | Error::RefinementExhausted { .. }
            | Error::ResidualTooLarge { .. }
            | Error::NoConvergence { .. } => true,
            Error::Curve { source, .. } => source.is_computational(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
