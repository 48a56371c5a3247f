//! Per-relation evaluation state: accumulated contents, the last round's
//! delta, and version counters that stamp cached subplan outputs.
//!
//! Plain relations are sets of rows. Relations with a MIN/MAX head
//! aggregate are lattice maps from group columns to the best value seen;
//! their delta holds the groups that strictly improved, so recursion
//! through them converges without ever retracting a tuple downstream.

use std::collections::{BTreeMap, BTreeSet};

use super::collection::{Collection, Row};
use super::monoid::Diff;
use crate::frontend::{AggregateFunc, Program, RelationKind};
use crate::planner::Role;

/// External row format for inputs and results.
pub type Database = BTreeMap<String, BTreeSet<Vec<i64>>>;

#[derive(Debug)]
pub enum RelContents {
    Set {
        /// Sorted, distinct.
        full: Vec<Row>,
        delta: Vec<Row>,
        /// Rows merged at the latest `full_version` bump, for incremental
        /// arrangement maintenance.
        last_added: Vec<Row>,
    },
    Lattice {
        func: AggregateFunc,
        full: BTreeMap<Row, i64>,
        delta: BTreeMap<Row, i64>,
    },
}

#[derive(Debug)]
pub struct RelState {
    pub contents: RelContents,
    pub full_version: u64,
    pub delta_version: u64,
}

pub type StateMap = BTreeMap<String, RelState>;

fn better(func: AggregateFunc, candidate: i64, current: i64) -> bool {
    match func {
        AggregateFunc::Min => candidate < current,
        AggregateFunc::Max => candidate > current,
        _ => unreachable!("only lattice aggregates keep lattice state"),
    }
}

fn split_value(row: &[i64]) -> (Row, i64) {
    let (last, group) = row.split_last().expect("lattice rows are non-empty");
    (Row::from_slice(group), *last)
}

/// Initialize every relation of the program, folding seed rows in.
pub fn load(program: &Program, inputs: &Database) -> StateMap {
    let mut states = StateMap::new();
    for (name, info) in &program.relations {
        let seed = inputs.get(name);
        let contents = match info.aggregate {
            Some(func) if func.is_lattice() => {
                let mut full = BTreeMap::new();
                for row in seed.into_iter().flatten() {
                    let (group, value) = split_value(row);
                    match full.get(&group) {
                        Some(&cur) if !better(func, value, cur) => {}
                        _ => {
                            full.insert(group, value);
                        }
                    }
                }
                RelContents::Lattice { func, full, delta: BTreeMap::new() }
            }
            _ => {
                let full: Vec<Row> =
                    seed.into_iter().flatten().map(|r| Row::from_slice(r)).collect();
                // BTreeSet iteration is already sorted and distinct.
                RelContents::Set { full, delta: Vec::new(), last_added: Vec::new() }
            }
        };
        states.insert(name.clone(), RelState { contents, full_version: 0, delta_version: 0 });
    }
    debug_assert!(states
        .iter()
        .all(|(n, s)| matches!(s.contents, RelContents::Set { .. })
            || program.relation(n).kind == RelationKind::Idb));
    states
}

impl RelState {
    /// Fold one round's candidate rows in: keep what is genuinely new (or
    /// strictly better), expose it as the delta, and report its size.
    /// Candidates may be unsorted and repeat rows.
    pub fn apply_candidates(&mut self, mut candidates: Vec<Row>) -> usize {
        match &mut self.contents {
            RelContents::Set { full, delta, last_added } => {
                candidates.sort_unstable();
                candidates.dedup();
                let new: Vec<Row> = candidates
                    .into_iter()
                    .filter(|row| full.binary_search(row).is_err())
                    .collect();
                if !new.is_empty() {
                    let old = std::mem::take(full);
                    *full = merge_sorted(old, &new);
                    *last_added = new.clone();
                    self.full_version += 1;
                }
                *delta = new;
                self.delta_version += 1;
                delta.len()
            }
            RelContents::Lattice { func, full, delta } => {
                let func = *func;
                let mut improved: BTreeMap<Row, i64> = BTreeMap::new();
                for row in candidates {
                    let (group, value) = split_value(&row);
                    let current = improved.get(&group).or_else(|| full.get(&group));
                    match current {
                        Some(&cur) if !better(func, value, cur) => {}
                        _ => {
                            improved.insert(group, value);
                        }
                    }
                }
                if !improved.is_empty() {
                    for (group, value) in &improved {
                        full.insert(group.clone(), *value);
                    }
                    self.full_version += 1;
                }
                let count = improved.len();
                *delta = improved;
                self.delta_version += 1;
                count
            }
        }
    }

    /// Empty the delta once its stratum converges.
    pub fn clear_delta(&mut self) {
        match &mut self.contents {
            RelContents::Set { delta, .. } => delta.clear(),
            RelContents::Lattice { delta, .. } => delta.clear(),
        }
        self.delta_version += 1;
    }

    pub fn version(&self, role: Role) -> u64 {
        match role {
            Role::Delta => self.delta_version,
            Role::Edb | Role::Full => self.full_version,
        }
    }

    /// The rows a scan of this relation sees, all with diff one.
    pub fn scan<D: Diff>(&self, role: Role) -> Collection<D> {
        let one = D::one();
        let rows = match (&self.contents, role) {
            (RelContents::Set { full, .. }, Role::Edb | Role::Full) => {
                full.iter().map(|r| (r.clone(), one)).collect()
            }
            (RelContents::Set { delta, .. }, Role::Delta) => {
                delta.iter().map(|r| (r.clone(), one)).collect()
            }
            (RelContents::Lattice { full, .. }, Role::Edb | Role::Full) => {
                expand_lattice(full, one)
            }
            (RelContents::Lattice { delta, .. }, Role::Delta) => expand_lattice(delta, one),
        };
        Collection::from_sorted(rows)
    }

    /// Final contents in the external row format.
    pub fn rows(&self) -> BTreeSet<Vec<i64>> {
        match &self.contents {
            RelContents::Set { full, .. } => full.iter().map(|r| r.to_vec()).collect(),
            RelContents::Lattice { full, .. } => full
                .iter()
                .map(|(group, value)| {
                    let mut row = group.to_vec();
                    row.push(*value);
                    row
                })
                .collect(),
        }
    }
}

/// One (group, best value) row per lattice group; appending the value
/// keeps the group-sorted order.
fn expand_lattice<D: Diff>(map: &BTreeMap<Row, i64>, one: D) -> Vec<(Row, D)> {
    map.iter()
        .map(|(group, value)| {
            let mut row = Row::with_capacity(group.len() + 1);
            row.extend_from_slice(group);
            row.push(*value);
            (row, one)
        })
        .collect()
}

fn merge_sorted(old: Vec<Row>, new: &[Row]) -> Vec<Row> {
    let mut out = Vec::with_capacity(old.len() + new.len());
    let mut new_it = new.iter().peekable();
    for row in old {
        while new_it.peek().is_some_and(|n| **n < row) {
            out.push((*new_it.next().expect("peeked")).clone());
        }
        out.push(row);
    }
    out.extend(new_it.cloned());
    out
}
