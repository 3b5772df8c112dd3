use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the library. CLI exit codes are derived from the
/// variant, see [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("dataset error at row {row}: {msg}")]
    Dataset { row: usize, msg: String },

    #[error(
        "acceptance rate too low: accepted {accepted} of {attempted} attempts \
         (rate {rate:.3e}), needed {target}"
    )]
    AcceptanceTooLow {
        accepted: u64,
        attempted: u64,
        target: u64,
        rate: f64,
    },

    #[error("enumeration size {size} exceeds cap {cap}")]
    ResourceLimit { size: u128, cap: u128 },

    #[error("artifact error: {0}")]
    Artifact(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable process exit code for this error. 2 = bad config/parameters/data,
    /// 3 = rejection sampling exhausted, 4 = I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::AcceptanceTooLow { .. } => 3,
            Error::Io(_) => 4,
            _ => 2,
        }
    }
}
