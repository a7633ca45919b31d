//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("covariance matrix is singular or ill-conditioned (estimated condition number {cond:.3e})")]
    SingularCovariance { cond: f64 },

    #[error("basis columns are not orthonormal")]
    NotOrthonormal,

    #[error("degenerate projection: a score vector has zero variance")]
    DegenerateProjection,

    #[error("slope vector is numerically zero; no direction is identified")]
    DegenerateDirection,

    #[error("invalid slice count {h} for {n} observations")]
    InvalidSliceCount { h: usize, n: usize },

    #[error("slice {slice} has {count} observations but needs more than {need} (p = {p})")]
    SliceTooSmall {
        /// 1-based slice index.
        slice: usize,
        count: usize,
        need: usize,
        p: usize,
    },

    #[error("invalid slice weights: {0}")]
    InvalidWeights(String),

    #[error("requested rank {k} exceeds the available dimensions ({max})")]
    RankExceedsDimensions { k: usize, max: usize },

    #[error("leave-one-out refit for observation {index} leaves slice {slice} with {count} observations (p = {p})")]
    LeaveOneOutInfeasible {
        /// 1-based observation index.
        index: usize,
        /// 1-based slice index.
        slice: usize,
        count: usize,
        p: usize,
    },

    #[error("response value {y0} lies outside every slice boundary")]
    OutOfRange { y0: f64 },

    #[error("population spec lacks within-slice residual second moments")]
    MissingResidualMoments,

    #[error("eigenvalue {index} is not positive; influence formulas divide by it")]
    DegenerateEigenvalue { index: usize },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("every repetition of the study was infeasible")]
    AllRepsInfeasible,

    #[error("no feasible (H, K) pair among the candidates")]
    NoFeasiblePair,

    #[error("cannot open {path}: {source}")]
    FileNotFound {
        path: String,
        source: std::io::Error,
    },

    #[error("parse error at data row {row}, column {column}: {message}")]
    ParseError {
        /// 1-based data row (header excluded).
        row: usize,
        column: String,
        message: String,
    },

    #[error("response column '{0}' not found in header")]
    MissingResponse(String),

    #[error("non-numeric cell at data row {row}, column {column}: '{value}'")]
    NonNumericCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit code used by the command line front end:
    /// 1 usage error, 2 data error, 3 numerical infeasibility.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            InvalidParameters(_) | InvalidConfig(_) => 1,
            DimensionMismatch(_) | InsufficientData(_) | NonFinite(_) | InvalidDimension(_)
            | FileNotFound { .. } | ParseError { .. } | MissingResponse(_)
            | NonNumericCell { .. } | Io(_) => 2,
            _ => 3,
        }
    }
}
