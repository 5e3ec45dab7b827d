use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Two objects that must live on the same box (or a site/window that must
    /// fit inside a box) do not.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("{what}: {count} free sites exceed the limit of {limit}")]
    Capacity {
        what: &'static str,
        count: usize,
        limit: usize,
    },

    #[error("site ({x},{y}) is clamped and cannot be updated")]
    ClampViolation { x: i32, y: i32 },

    /// Coupling from the past gave up; `sweeps` is the deepest start time
    /// that was tried.
    #[error("coupling from the past did not coalesce within {sweeps} sweeps")]
    NonCoalescence { sweeps: u64 },

    #[error("unsupported parameter: {0}")]
    Unsupported(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("region has no sites inside the box")]
    EmptyRegion,

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("fit needs at least {needed} finite points, got {got}")]
    Fit { needed: usize, got: usize },
}
