use thiserror::Error;

/// Errors produced by the coverage model.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point ({x}, {y}) lies outside the device plane")]
    OutsidePlane { x: f64, y: f64 },

    #[error("reference point lies inside the blocker disk (distance {distance} < {radius})")]
    InsideBlocker { distance: f64, radius: f64 },

    #[error("degenerate region: {0}")]
    Degenerate(String),

    #[error("quadrature did not converge: estimate {estimate}, error {error} after {intervals} intervals")]
    Quadrature {
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    #[error("ergodic rate diverges: {0}")]
    Divergent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
