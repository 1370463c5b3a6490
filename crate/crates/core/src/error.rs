//! Error type shared across the solver.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("inadmissible state at {context}: rho={rho:.6e}, p={p:.6e}")]
    Inadmissible { context: String, rho: f64, p: f64 },

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("gmsh parse error at line {line}: {msg}")]
    GmshParse { line: usize, msg: String },

    #[error("config error:\n{0}")]
    Config(String),

    #[error("fatal diagnostic at step {step}, element {element}: {reason}")]
    Fatal {
        step: usize,
        element: usize,
        reason: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
