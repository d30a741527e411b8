//! Error types shared across the engine.

use thiserror::Error;

use crate::time::TimePoint;

/// Errors raised while constructing or manipulating intervals and relations.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum TemporalError {
    #[error("empty interval: start {start} must precede end {end}")]
    EmptyInterval { start: i64, end: i64 },
    #[error("window width must be positive, got {0}")]
    NonPositiveWindow(i64),
    #[error("change-point stride must be positive, got {0}")]
    NonPositiveStride(usize),
}

/// Errors raised by property-value computations and aggregation.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ValueError {
    #[error("aggregate `{func}` applied to empty input")]
    EmptyAggregate { func: String },
    #[error("aggregate `{func}` requires {expected} operands, got {got}")]
    BadOperands {
        func: String,
        expected: &'static str,
        got: String,
    },
    #[error("integer overflow in `{0}`")]
    Overflow(String),
}

/// Errors raised while assembling or operating on temporal graphs.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("{0}")]
    Temporal(#[from] TemporalError),
    #[error("{0}")]
    Value(#[from] ValueError),
    #[error(
        "conflicting attribute sets for undirected edge ({src}, {dst}) at point {at}: \
         both orientations carry different properties (parallel edges are not supported)"
    )]
    MultigraphAttempt { src: u64, dst: u64, at: TimePoint },
    #[error("evaluation error: {0}")]
    Eval(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("operands have different directedness (left directed={left}, right directed={right})")]
    DirectednessMismatch { left: bool, right: bool },
    #[error("operator `{op}` requires a directed graph")]
    RequiresDirected { op: &'static str },
    #[error("grouping key collision: distinct keys {a} and {b} map to the same synthetic id")]
    SkolemCollision { a: String, b: String },
    #[error("unknown aggregate function `{0}`")]
    UnknownAggregate(String),
    #[error("{0}")]
    Unsupported(String),
}
