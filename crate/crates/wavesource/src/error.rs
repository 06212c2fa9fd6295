//! Error type shared by all modules.
//!
//! Variants map one-to-one onto the CLI exit codes: `Config` and `Domain`
//! exit with 2, `Degenerate` with 3, `Io` with 4.

/// Library-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A precondition on an operation's inputs was violated.
    #[error("domain error: {0}")]
    Domain(String),
    /// The computation is numerically degenerate (e.g. a kernel integral
    /// vanishes), so the requested reconstruction is not identifiable.
    #[error("numerical degeneracy: {0}")]
    Degenerate(String),
    /// The experiment configuration is malformed or inconsistent.
    #[error("config error: {0}")]
    Config(String),
    /// File-system failure while reading configs or writing reports.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit code the CLI maps this error to (success is 0).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Config(_) => 2,
            Error::Degenerate(_) => 3,
            Error::Io(_) => 4,
        }
    }
}
