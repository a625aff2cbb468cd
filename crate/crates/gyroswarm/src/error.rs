use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("degenerate frame: columns are nearly parallel")]
    DegenerateFrame,

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("vehicles {i} and {j} are coincident (separation {sep:.3e} m)")]
    Collision { i: usize, j: usize, sep: f64 },

    #[error("non-finite control for vehicle {vehicle} at tick {tick}")]
    NonFiniteControl { tick: usize, vehicle: usize },

    #[error("state became non-finite at tick {tick}")]
    NonFiniteState { tick: usize },

    /// The alignment potential is undefined here (boundary of its domain);
    /// monitoring code maps this to +inf instead of failing.
    #[error("boundary of the potential domain: {0}")]
    Boundary(String),

    #[error("feedback law failed at tick {tick}: {source}")]
    LawFailure {
        tick: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("empty trajectory")]
    EmptyTrajectory,

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
