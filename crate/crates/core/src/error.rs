// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("time {t} is outside the grid span [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("no disjoint tuple of paths connects the given endpoints")]
    NoOptimizer,

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::OutOfDomain { .. } => "out-of-domain",
            Error::Capacity(_) => "capacity",
            Error::NoOptimizer => "no-optimizer",
            Error::Parse { .. } => "parse-error",
            Error::Validation(_) => "validation-error",
            Error::Io(_) => "io-error",
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
