//! Plan execution: collections, operator kernels, cached subplan
//! evaluation, and the stratified semi-naive fixpoint.
//!
//! The same machinery runs set semantics and multiplicity counting; the
//! diff monoid ([`Presence`] or [`Count`]) is a type parameter threaded
//! through every kernel, and [`evaluate`] picks the instantiation.

pub mod collection;
pub mod eval;
pub mod fixpoint;
pub mod monoid;
pub mod state;

pub use collection::{antijoin, flat_map, join, join_flat_map, row, Collection, Row};
pub use fixpoint::{
    evaluate, EngineOptions, EvalError, EvalResult, EvalStats, RuleStats, StratumStats,
    SubplanStats,
};
pub use monoid::{Count, Diff, Presence};
pub use state::Database;
