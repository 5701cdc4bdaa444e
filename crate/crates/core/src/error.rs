use std::path::PathBuf;

use crate::coalition::Coalition;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("capacity exceeded: {what} is {actual}, limit is {limit}")]
    Capacity {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    #[error("value function returned non-finite value {value} for coalition {coalition}")]
    Evaluation { coalition: Coalition, value: f64 },

    #[error("linear algebra: {0}")]
    LinearAlgebra(String),

    #[error("backend {backend} does not support {reason}")]
    UnsupportedBackend {
        backend: &'static str,
        reason: String,
    },

    #[error("no rows match coalition {coalition}; the data cannot support this conditional")]
    ConditioningInfeasible { coalition: Coalition },

    #[error("{}: {message}", path.display())]
    Input { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub fn input(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Input {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit status for the CLI: 2 for usage/input problems, 3 when a
    /// conditional cannot be estimated from the data, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConditioningInfeasible { .. } => 3,
            Error::Argument(_) | Error::Input { .. } | Error::Io(_) => 2,
            Error::UnsupportedBackend { .. } | Error::Capacity { .. } => 2,
            Error::Evaluation { .. } | Error::LinearAlgebra(_) => 1,
        }
    }
}
