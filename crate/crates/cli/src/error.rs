use std::fmt;

/// Failure of a command, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or parameters (exit 2). `help` asks for the usage text.
    Usage { message: String, help: bool },
    /// Unreadable or invalid input data (exit 3).
    Data(String),
    /// Anything else, including failures writing outputs (exit 4).
    Internal(String),
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage {
            message: message.into(),
            help: false,
        }
    }

    pub fn usage_with_help(message: impl Into<String>) -> Self {
        CliError::Usage {
            message: message.into(),
            help: true,
        }
    }

    pub fn usage_from(e: permkit::Error) -> Self {
        CliError::usage(e.to_string())
    }

    pub fn data(e: impl fmt::Display) -> Self {
        CliError::Data(e.to_string())
    }

    pub fn internal(e: impl fmt::Display) -> Self {
        CliError::Internal(e.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage { .. } => 2,
            CliError::Data(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage { message, .. } => write!(f, "{message}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

/// Library errors outside data loading: bad parameters are usage errors,
/// malformed files are data errors, I/O failures are internal.
impl From<permkit::Error> for CliError {
    fn from(e: permkit::Error) -> Self {
        match e {
            permkit::Error::InvalidArgument(_) => CliError::usage(e.to_string()),
            permkit::Error::Parse { .. } | permkit::Error::Format { .. } | permkit::Error::Snapshot(_) => {
                CliError::data(e)
            }
            permkit::Error::Io(_) => CliError::internal(e),
        }
    }
}
