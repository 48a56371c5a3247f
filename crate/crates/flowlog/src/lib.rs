//! A Datalog engine built around two ideas: plan every rule as a rooted
//! spanning tree of its join graph (picked by a structural cost model), and
//! execute the resulting plans as dataflows over collections of tuples with
//! monoid-typed differences, so set semantics, counting, and lattice
//! aggregation (recursive MIN/MAX) all run through one semi-naive fixpoint.
//!
//! The crate is layered bottom-up:
//!
//! * [`frontend`]: parsing, validation, dependency analysis, stratification,
//!   and the per-rule catalog (join-graph atoms, semijoin atoms, filters,
//!   antijoin obligations).
//! * [`optimizer`]: join graphs, enumeration of rooted maximum-weight
//!   spanning trees, the distinct-variable cost model, plan selection, and
//!   the two-pass semijoin prefilter rewrite ([`optimizer::sip`]).
//! * [`planner`]: lowering a selected tree to an operator IR, operator
//!   fusion, canonical plan encoding, and cross-rule subplan sharing.
//! * [`engine`]: collections, arrangements, the operator library, and the
//!   stratified semi-naive evaluator with per-run statistics.
//! * [`io`]: delimited fact files and the string dictionary that lets
//!   symbolic data ride through the integer engine.
//! * [`oracle`]: a deliberately naive evaluator and textbook graph
//!   algorithms used to cross-check the engine, plus a seeded graph
//!   generator.
//!
//! [`compile`] and [`CompiledProgram::run`] tie the layers together; the
//! `flowlog` binary is a thin wrapper over them.

pub mod engine;
pub mod frontend;
pub mod io;
pub mod optimizer;
pub mod oracle;
pub mod planner;
mod pipeline;

pub use optimizer::SipMode;
pub use pipeline::{compile, render_stats, CompiledProgram, Error, Options};
