// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coincident points {x:?} and {y:?}: kernel is singular")]
    Coincident { x: [f64; 3], y: [f64; 3] },

    #[error("invalid argument: {0}")]
    Domain(String),

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("degenerate decomposition at resolution {n}: {detail}")]
    Degenerate { n: usize, detail: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {detail} (residual {residual:.3e})")]
    Numeric { detail: String, residual: f64 },

    #[error("no divergence-free mode carries a nonzero moment (shape violates the moment assumption)")]
    NoDipoleMode,

    #[error("k^2 = {re:.6e} + {im:.6e}i is not real; use the Lorentz tuning path")]
    ComplexWavenumber { re: f64, im: f64 },

    #[error("no sign choice gives a nonnegative damping (gamma = {plus:.3e} / {minus:.3e})")]
    UnphysicalDamping { plus: f64, minus: f64 },

    #[error("1 + eta*lambda vanishes for family-3 mode {mode} (lambda = {lambda:.6e})")]
    ResonanceCollision { mode: usize, lambda: f64 },

    #[error("geometry: {0}")]
    Geometry(String),

    #[error("cluster is empty: {0}")]
    EmptyCluster(String),

    #[error("resource cap exceeded: {unknowns} unknowns > cap {cap}; try resolution {suggested}")]
    Resource { unknowns: usize, cap: usize, suggested: usize },

    #[error("linear solver failed: {detail} (condition estimate {cond:.3e})")]
    Singular { detail: String, cond: f64 },

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("regime check failed: {0}")]
    Regime(String),

    #[error("{stage}: {source}")]
    Stage { stage: &'static str, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("lapack: {0}")]
    Lapack(#[from] ndarray_linalg::error::LinalgError),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Stage { source, .. } => source.exit_code(),
            Error::Resource { .. } => 4,
            Error::Numeric { .. } | Error::Singular { .. } | Error::Lapack(_) => 3,
            Error::Io(_) => 1,
            _ => 2,
        }
    }

    /// Labels the error with the pipeline stage it came from (the innermost label wins).
    pub fn in_stage(self, stage: &'static str) -> Error {
        match self {
            Error::Stage { .. } => self,
            other => Error::Stage { stage, source: Box::new(other) },
        }
    }
}
