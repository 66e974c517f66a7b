use dods_core::Error as CoreError;
use std::path::PathBuf;
use thiserror::Error;

/// Process exit statuses. Codes 0 to 4 are the stable contract.
pub mod code {
    pub const OK: u8 = 0;
    pub const CONFIG: u8 = 1;
    pub const COMPATIBILITY: u8 = 2;
    pub const CAUSALITY: u8 = 3;
    pub const NO_ROOTS: u8 = 4;
    /// A check ran to completion and did not pass.
    pub const CHECK_FAILED: u8 = 5;
    /// A computation failed for numerical reasons.
    pub const NUMERICAL: u8 = 6;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    CheckFailed(String),
    #[error("no roots found: {0}")]
    NoRoots(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e {
                CoreError::Compatibility { .. } => code::COMPATIBILITY,
                CoreError::Causality { .. } | CoreError::DelayOrder { .. } => code::CAUSALITY,
                CoreError::NoRootFound(_) => code::NO_ROOTS,
                CoreError::Syntax { .. }
                | CoreError::UnknownIdentifier(_)
                | CoreError::Config(_)
                | CoreError::Param(_)
                | CoreError::DegenerateFamily(_)
                | CoreError::UnknownFamily(_)
                | CoreError::ConstraintViolated(_)
                | CoreError::NotAParticularSolution(_) => code::CONFIG,
                CoreError::Domain(_)
                | CoreError::Manifold { .. }
                | CoreError::BlowUp(_)
                | CoreError::NonGraph(_)
                | CoreError::Stiffness { .. }
                | CoreError::OutOfRange { .. }
                | CoreError::NonMonotoneTransform(_) => code::NUMERICAL,
            },
            CliError::Io { .. } | CliError::Config { .. } | CliError::Usage(_) => code::CONFIG,
            CliError::CheckFailed(_) => code::CHECK_FAILED,
            CliError::NoRoots(_) => code::NO_ROOTS,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
