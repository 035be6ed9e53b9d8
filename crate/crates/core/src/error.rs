use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("mode index {index} out of range for a {n_modes}-mode state")]
    ModeOutOfRange { index: usize, n_modes: usize },

    #[error("shared vacuum tag {tag} refers to mode {mode}, which is no longer an undisturbed vacuum")]
    SharedVacuumDisturbed { tag: u32, mode: usize },

    #[error("unsupported pulse shape: {0}")]
    UnsupportedShape(String),

    #[error("quadrature grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("offset diverges: {0}")]
    Divergent(String),

    #[error("nothing to emit: result has no rows")]
    EmptyResult,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config {path}: {source}")]
    Config {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Rejects values outside the closed unit interval (and NaN).
pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::param(name, format!("{value} is outside [0, 1]")))
    }
}
