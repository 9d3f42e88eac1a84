use thiserror::Error;

/// Errors raised by the library.
///
/// Input problems (bad parameters, dimension mismatches, malformed files)
/// are distinguished from internal invariant violations so the CLI can map
/// them onto different exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid density operator: {0}")]
    InvalidState(String),

    #[error("witness does not detect the state (Tr(rho W) = {0:.6e})")]
    NotDetected(f64),

    #[error("frame is not orthonormal (Gram deviation {0:.3e})")]
    NotOrthonormal(f64),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the CLI: 2 for input errors, 3 for
    /// internal invariant violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invariant(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
