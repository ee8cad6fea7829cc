use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("nonzero mean ({mean:e})")]
    NonzeroMean { mean: f64 },

    #[error("nonzero total vorticity on torus ({mean:e})")]
    NonzeroVorticity { mean: f64 },

    #[error("insufficient resolution: {shells} dyadic shells, need at least 4")]
    InsufficientResolution { shells: usize },

    #[error("not in S'_h surrogate: homogeneous norm with s = {s} needs a mean-free field (mean {mean:e})")]
    NotHomogeneous { s: f64, mean: f64 },

    #[error("invalid Besov index: {0}")]
    InvalidIndex(String),

    #[error("no valid probes")]
    NoValidProbes,

    #[error("patch too large: extent {extent} exceeds {limit}")]
    PatchTooLarge { extent: f64, limit: f64 },

    #[error("invalid patch: {0}")]
    InvalidPatch(String),

    #[error("patch split: level set has {components} boundary components")]
    PatchSplit { components: usize },

    #[error("CFL violated: max|u|*dt = {displacement:e} > {limit:e}; try dt <= {suggested_dt:e}")]
    Cfl {
        displacement: f64,
        limit: f64,
        suggested_dt: f64,
    },

    #[error("velocity is not divergence free (max |div u| = {0:e})")]
    NotSolenoidal(f64),

    #[error("density contrast too large for preconditioner: no convergence after {iterations} iterations (residual {residual:e})")]
    PressureDiverged { iterations: usize, residual: f64 },

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("snapshot {path}: {message}")]
    Snapshot { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by the user's input rather than by the
    /// numerics: bad configuration, unusable patch or grid, unreadable files.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Config { .. }
                | Error::PatchTooLarge { .. }
                | Error::InvalidPatch(_)
                | Error::InvalidGrid(_)
                | Error::InvalidIndex(_)
                | Error::NotHomogeneous { .. }
                | Error::Snapshot { .. }
                | Error::Io(_)
        )
    }
}
