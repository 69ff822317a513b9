use std::fmt;
use std::path::Path;

use lel_core::Error;

/// Why a command stopped, mapped onto the exit code.
#[derive(Debug, Clone)]
pub enum Failure {
    /// Bad configuration or arguments: exit 2.
    Config(String),
    /// A solver or search did not converge: exit 3.
    Convergence(String),
    /// Reading or writing files: exit 4.
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Convergence(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Failure::Io(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Convergence(m) => write!(f, "convergence failure: {m}"),
            Failure::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::Domain(_) | Error::Parameter(_) => Failure::Config(e.to_string()),
            _ => Failure::Convergence(e.to_string()),
        }
    }
}

impl<T> From<lel_core::radial::SolveFailure<T>> for Failure {
    fn from(f: lel_core::radial::SolveFailure<T>) -> Self {
        f.error.into()
    }
}
