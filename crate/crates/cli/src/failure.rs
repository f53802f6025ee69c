use std::fmt;
use std::process::ExitCode;

/// A failed command, classified by exit status.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or malformed input files (exit 1).
    Usage(String),
    /// Infeasible data or a numerical breakdown (exit 2).
    Numerical(String),
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Failure::Usage(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Failure::Numerical(msg.into())
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            Failure::Usage(_) => ExitCode::from(1),
            Failure::Numerical(_) => ExitCode::from(2),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(msg) | Failure::Numerical(msg) => f.write_str(msg),
        }
    }
}

impl From<resgraph::Error> for Failure {
    fn from(e: resgraph::Error) -> Self {
        use resgraph::Error::*;
        let msg = e.to_string();
        match e {
            InvalidPair { .. }
            | InvalidParameter(_)
            | EmptySample
            | Parse { .. }
            | SizeMismatch { .. }
            | Io(_) => Failure::Usage(msg),
            NotPsd { .. }
            | Disconnected
            | Infeasible(_)
            | Incompletable { .. }
            | NotATree(_)
            | NoInformation
            | InconsistentPpr(_)
            | UndefinedMetric(_) => Failure::Numerical(msg),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}
