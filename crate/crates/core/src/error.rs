use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("inconsistent manifold spec: {0}")]
    InvalidSpec(String),

    #[error("model {model} requires interval length {expected}, got {actual}")]
    WrongLength {
        model: &'static str,
        expected: f64,
        actual: f64,
    },

    #[error("node {node} needs ghost data that is not available")]
    MissingGhost { node: usize },

    #[error("degenerate tangent plane: {0}")]
    DegeneratePlane(String),

    #[error("non-finite value in `{field}` at node {node} (t = {t})")]
    NonFinite {
        field: &'static str,
        node: usize,
        t: f64,
    },

    #[error("step limit of {max_steps} reached at t = {t}")]
    MaxSteps { max_steps: usize, t: f64 },

    #[error("no sign change of the probe coefficient on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("precondition window violated at node {node}: {reason}")]
    Window { node: usize, reason: String },

    #[error("axis {axis} collapses at the {end} pole")]
    CollapsingAxis { axis: usize, end: &'static str },

    #[error("trace too short: {0}")]
    ShortTrace(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
