use std::path::PathBuf;

/// Errors produced anywhere in the waveform chain or the experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A length or size does not match what the operation requires.
    #[error("sizing error: {0}")]
    Sizing(String),

    /// A parameter combination is invalid.
    #[error("configuration error: {0}")]
    Config(String),

    /// Some channel eigenvalue is too close to zero for zero-forcing.
    #[error("singular channel: |lambda_{index}| = {magnitude:e} below {threshold:e}")]
    SingularChannel {
        index: usize,
        magnitude: f64,
        threshold: f64,
    },

    /// A numerical routine was asked to evaluate outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by user input rather than by the simulation itself.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Sizing(_) | Error::Parse { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
