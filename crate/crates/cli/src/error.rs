//! Process-level error classification and exit codes.
//!
//! 0 = completed and every requested check passed; 1 = a verification
//! suite found a violated exact identity; 2 = a resource cap stopped the
//! run early; 3 = I/O failure; 4 = malformed spec or usage.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Grammar, resolution, or usage problem.
    Spec(String),
    /// Filesystem failure, with the offending path in the message.
    Io(String),
    /// Engine-level failure during the run.
    Core(walklab_core::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Spec(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<walklab_core::Error> for CliError {
    fn from(e: walklab_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Spec(_) => 4,
            CliError::Io(_) => 3,
            CliError::Core(
                walklab_core::Error::SupportCapExceeded { .. }
                | walklab_core::Error::BallCapExceeded { .. },
            ) => 2,
            CliError::Core(_) => 4,
        }
    }
}

/// Terminal state of a completed run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Clean,
    IdentityViolation,
    CapReached,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Clean => 0,
            Outcome::IdentityViolation => 1,
            Outcome::CapReached => 2,
        }
    }

    pub fn status(self) -> &'static str {
        match self {
            Outcome::Clean => "ok",
            Outcome::IdentityViolation => "identity_violation",
            Outcome::CapReached => "cap_reached",
        }
    }
}
