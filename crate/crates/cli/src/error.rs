use std::fmt;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const NON_FINITE: i32 = 3;
    pub const INVALID_DATA: i32 = 4;
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad config, unreadable or malformed input, dimension mismatch.
    Input(String),
    NonFiniteLoss(String),
    /// `validate` found points outside tolerance.
    InvalidData(String),
    /// Failure writing outputs.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => exit::INPUT,
            CliError::NonFiniteLoss(_) => exit::NON_FINITE,
            CliError::InvalidData(_) => exit::INVALID_DATA,
            CliError::Io(_) => exit::IO,
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::NonFiniteLoss(m) | CliError::InvalidData(m) | CliError::Io(m) => {
                f.write_str(m)
            }
        }
    }
}

impl std::error::Error for CliError {}

impl From<rmg_core::Error> for CliError {
    fn from(e: rmg_core::Error) -> Self {
        match e {
            rmg_core::Error::NonFiniteLoss { .. } => CliError::NonFiniteLoss(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
