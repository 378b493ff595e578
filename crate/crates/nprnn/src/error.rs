use std::fmt;

/// Errors produced by the library.
///
/// `Contract` marks a violated precondition (caller bug), the other variants
/// are runtime conditions that a caller may want to react to: numeric
/// overflow during a forward pass, an eigenvalue iteration that ran out of
/// budget, or malformed external data.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A precondition of an operation was violated.
    Contract(String),
    /// A forward pass produced a non-finite value; `step` is the first
    /// offending timestep (1-based).
    NonFinite { step: usize },
    /// Eigenvalue iteration did not converge within its budget; carries the
    /// best spectral-radius estimate found so far.
    NoConvergence { best_estimate: f64 },
    /// Malformed external data (IDX files, config files, checkpoints).
    Parse(String),
    /// I/O failure, with path context baked into the message.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Contract(msg) => write!(f, "contract violation: {msg}"),
            Error::NonFinite { step } => {
                write!(f, "non-finite value produced at timestep {step}")
            }
            Error::NoConvergence { best_estimate } => write!(
                f,
                "eigenvalue iteration did not converge (best estimate {best_estimate})"
            ),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Error {
        Error::Contract(msg.into())
    }

    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Error {
        Error::Io(format!("{}: {err}", path.display()))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
