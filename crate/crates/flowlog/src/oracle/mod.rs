//! Independent ground truth for differential testing.
//!
//! Three legs: [`naive_evaluate`], a no-optimization fixpoint evaluator that
//! shares only the frontend with the engine; [`reference`] algorithms for
//! the graph problems the test corpus encodes; and [`generate_graph`] for
//! seeded random instances. Agreement of all three with the engine is the
//! core correctness argument.

pub mod generate;
pub mod naive;
pub mod reference;

pub use generate::{generate_graph, Density, Edge, RandomGraphSpec};
pub use naive::{naive_evaluate, Database, Relation};
pub use reference::{
    dijkstra, even_hop_ancestors, min_label_components, transitive_closure, two_colorable_from,
    NegativeWeight,
};
