use std::fmt;
use std::path::Path;

use nls_core::Error;

/// Command failure, mapped onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or config; exit 2.
    Usage(String),
    /// I/O, numerical or simulation failure; exit 1.
    Runtime(String),
    /// The run completed but a verification gate failed; exit 3.
    Verification(String),
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Failure::Usage(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        Failure::Runtime(msg.into())
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        Failure::Runtime(format!("{}: {err}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Runtime(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Verification(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Runtime(m) => write!(f, "error: {m}"),
            Failure::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidParameter(_)
            | Error::SeriesTooShort(_)
            | Error::Unstable { .. }
            | Error::UnsupportedFamily { .. }
            | Error::LagOutOfRange { .. }
            | Error::Bandwidth(_)
            | Error::UnknownWindow(_)
            | Error::NotLocallyQuadratic(_)
            | Error::NegativeSpectralWindow(_)
            | Error::SizeLimit { .. }
            | Error::Budget { .. }
            | Error::InsufficientReplications { .. }
            | Error::Config(_) => Failure::Usage(msg),
            _ => Failure::Runtime(msg),
        }
    }
}
