use std::fmt;
use std::io;
use std::path::Path;

use xwalk_core::eval::trec::TrecError;
use xwalk_core::eval::{FusionError, SynthError};
use xwalk_core::{Bm25Error, BuildError, LoadError, LogError, WalkError};

/// Process exit status classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    /// Bad flags or parameter values.
    Usage,
    /// Unreadable, unwritable or malformed files.
    Input,
    /// Query absent from the graph.
    ColdStart,
}

impl ExitKind {
    pub fn code(self) -> i32 {
        match self {
            ExitKind::Usage => 1,
            ExitKind::Input => 2,
            ExitKind::ColdStart => 3,
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub kind: ExitKind,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl fmt::Display) -> Self {
        Failure { kind: ExitKind::Usage, message: message.to_string() }
    }

    pub fn input(message: impl fmt::Display) -> Self {
        Failure { kind: ExitKind::Input, message: message.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.code()
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

/// Wraps an error with the path it concerns.
pub fn at_path<E: fmt::Display>(path: &Path) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure::input(format!("{}: {e}", path.display()))
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::input(e)
    }
}

impl From<WalkError> for Failure {
    fn from(e: WalkError) -> Self {
        match e {
            WalkError::NoSuchQuery(_) => Failure { kind: ExitKind::ColdStart, message: e.to_string() },
            _ => Failure::usage(e),
        }
    }
}

impl From<BuildError> for Failure {
    fn from(e: BuildError) -> Self {
        match e {
            BuildError::BadCoefficients => Failure::usage(e),
            _ => Failure::input(e),
        }
    }
}

impl From<Bm25Error> for Failure {
    fn from(e: Bm25Error) -> Self {
        match e {
            Bm25Error::BadParams { .. } => Failure::usage(e),
            Bm25Error::EmptyCorpus => Failure::input(e),
        }
    }
}

impl From<FusionError> for Failure {
    fn from(e: FusionError) -> Self {
        Failure::usage(e)
    }
}

impl From<SynthError> for Failure {
    fn from(e: SynthError) -> Self {
        Failure::usage(e)
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        Failure::input(e)
    }
}

impl From<LogError> for Failure {
    fn from(e: LogError) -> Self {
        Failure::input(e)
    }
}

impl From<TrecError> for Failure {
    fn from(e: TrecError) -> Self {
        Failure::input(e)
    }
}
