//! Program text to validated, analyzed rules.
//!
//! `parse_program` turns source text into a [`Program`] and rejects
//! malformed or unsafe rules. [`DependencyGraph`] and [`stratify`] order the
//! rules into strata; [`RuleCatalog`] classifies each rule's body into join
//! atoms, semijoin atoms, filters, and antijoin obligations for the
//! optimizer.

pub mod ast;
pub mod catalog;
pub mod dependency;
pub mod parser;

pub use ast::{
    AggExpr, AggregateFunc, AggregateSpec, Atom, CmpOp, Constraint, Program, RelationInfo,
    RelationKind, Rule, Term,
};
pub use catalog::{
    build_rule_catalog, AntijoinObligation, CatalogAtom, FilterSite, RuleCatalog, SemijoinAtom,
};
pub use dependency::{stratify, DependencyGraph, Stratification, UnstratifiableProgram};
pub use parser::{parse_program, ParseError};
