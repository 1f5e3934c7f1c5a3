use std::fmt;

use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported polynomial degree r = {0} (supported: 1..=8)")]
    UnsupportedDegree(usize),

    #[error("unsupported tableau `{name}`: {reason}")]
    UnsupportedTableau { name: String, reason: String },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("fields live on different meshes")]
    MeshMismatch,

    #[error("non-finite value {value} at x = {x}")]
    NonFinite { x: f64, value: f64 },

    #[error("x = {0} lies outside the problem domain")]
    OutsideDomain(f64),

    #[error("I + lambda*A is singular at lambda = {0}")]
    SingularStage(f64),

    #[error("SAV scalar system is singular (condition estimate {0:e})")]
    SingularSav(f64),

    #[error("eigensolver failed on a {size}x{size} matrix: {detail}")]
    Eigen { size: usize, detail: String },

    #[error(
        "startup fixed-point iteration did not converge after {iterations} iterations \
         (last increment {increment:e}); try a smaller time step"
    )]
    StartupDiverged { iterations: usize, increment: f64 },

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed reference file: {0}")]
    Reference(String),

    #[error("error table: {0}")]
    ErrorTable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::AtStep {
            step,
            source: Box::new(self),
        }
    }

    /// Classification used by the command-line front end for exit codes.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_)
            | Error::UnsupportedDegree(_)
            | Error::UnsupportedTableau { .. }
            | Error::InvalidMesh(_)
            | Error::Reference(_) => ErrorKind::Configuration,
            Error::Io(_) => ErrorKind::Io,
            Error::AtStep { source, .. } => source.kind(),
            _ => ErrorKind::Numerical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Configuration,
    Numerical,
    Io,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ErrorKind::Configuration => "configuration",
            ErrorKind::Numerical => "numerical",
            ErrorKind::Io => "io",
        };
        f.write_str(s)
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
