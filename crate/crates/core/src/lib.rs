//! A single-node engine for temporal property graphs.
//!
//! Graphs evolve over a discrete timeline; every vertex, edge, and attribute
//! record carries a half-open validity interval. Operators are defined by
//! point semantics: applying an operator and then taking the state at a time
//! point gives the same result as taking the state first and applying the
//! nontemporal counterpart. That property is the backbone of the test suite.
//!
//! Layout:
//! * [`time`], [`relation`]: intervals and interval-stamped relations with
//!   the core primitives (coalesce, split, normalize, extend, change points)
//! * [`value`], [`agg`]: property values, aggregation, temporal group-by
//! * [`graph`]: the four-relation temporal property graph and its rules
//! * [`expr`]: the expression language used by predicates and map functions
//! * [`ops`]: the relational operator algebra over whole graphs
//! * [`analytics`]: interval-batched vertex-centric computation
//! * [`repr`]: interchangeable physical representations and dispatch
//! * [`generate`]: synthetic evolving-graph generator
//! * [`fixtures`]: small hand-checked graphs used across the test suites

pub mod agg;
pub mod analytics;
pub mod config;
pub mod error;
pub mod expr;
pub mod fixtures;
pub mod generate;
pub mod graph;
pub mod ops;
pub mod relation;
pub mod repr;
pub mod time;
pub mod value;

pub use agg::{apply_agg, resolve, AggFunc, ResolveSpec};
pub use error::{GraphError, TemporalError, ValueError};
pub use graph::{EdgeKey, SnapshotGraph, TGraph, VertexId, Violation};
pub use relation::TemporalRelation;
pub use time::{Interval, IntervalSet, TimePoint};
pub use value::{PropertySet, PropertyValue};
