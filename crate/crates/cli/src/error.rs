use std::fmt;

/// Failure of a CLI command with its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad invocation or empty selection (exit 2).
    Usage(String),
    /// Invalid or incomplete configuration (exit 2).
    Config(String),
    /// The run itself failed (exit 1).
    Run(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn run(msg: impl Into<String>) -> Self {
        CliError::Run(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Run(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Run(m) => write!(f, "{m}"),
        }
    }
}

impl From<isolink::Error> for CliError {
    fn from(e: isolink::Error) -> Self {
        match e {
            isolink::Error::Config(m) => CliError::Config(m),
            other => CliError::Run(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(format!("io error: {e}"))
    }
}
