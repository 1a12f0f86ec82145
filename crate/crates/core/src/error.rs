use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("index {index} out of range for {len} qubits")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension {0} is not a power of two (>= 2)")]
    DimNotPowerOfTwo(usize),

    #[error("norm estimate must be positive, got {0}")]
    InvalidNorm(f64),

    #[error("row {row} has {nonzeros} structural nonzeros, requested #{k}")]
    OutOfRange { row: usize, k: usize, nonzeros: usize },

    #[error("circuit needs {needed} qubits, cap is {cap}")]
    TooManyQubits { needed: usize, cap: usize },

    #[error("predicate reads {predicate} bits but register has {register}")]
    BitWidthMismatch { predicate: u32, register: u32 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("eigenvalue {0} of the rescaled operator lies outside [0, 1)")]
    SpectrumOutOfRange(f64),

    #[error("no eigenvalue found on either side of 1/2")]
    NoEigenvalueInHalf,

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("amplitude amplification failed after {0} attempts")]
    AmplificationFailed(usize),

    #[error("interface at z = {0} is not a grid point")]
    InterfaceMisaligned(f64),

    #[error("matching determinant has no sign change on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("duplicate entry at ({0}, {1})")]
    DuplicateEntry(usize, usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of a numerical routine, as opposed to rejected input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::NoBracket { .. }
                | Error::AmplificationFailed(_)
                | Error::NoEigenvalueInHalf
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
