use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by configuration, marching and output.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown config key `{key}` (line {line})")]
    UnknownKey { key: String, line: usize },

    #[error("missing required config key `{0}`")]
    MissingKey(String),

    #[error("malformed config line {line}: {msg}")]
    Syntax { line: usize, msg: String },

    #[error("invalid value for `{key}`: {msg}")]
    InvalidValue { key: String, msg: String },

    #[error("CFL violation: theta = {theta:.6} > 1 for beam {beam} (`grid.dx`/`grid.dy` too coarse in y)")]
    Cfl { beam: usize, theta: f64 },

    #[error("non-finite field value at step {step}")]
    NonFinite { step: usize },

    #[error("field blew up at step {step} (|u|^2 = {value:e})")]
    BlowUp { step: usize, value: f64 },

    #[error("grids are not nested: {0}")]
    NonNested(String),

    #[error("{0}")]
    Invalid(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(key: &str, msg: impl Into<String>) -> Self {
        Error::InvalidValue {
            key: key.to_string(),
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the configuration document.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::UnknownKey { .. }
                | Error::MissingKey(_)
                | Error::Syntax { .. }
                | Error::InvalidValue { .. }
                | Error::Cfl { .. }
        )
    }

    /// True for numerical blow-up during the march.
    pub fn is_blow_up(&self) -> bool {
        matches!(self, Error::BlowUp { .. } | Error::NonFinite { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
