//! Cached evaluation of plan dag nodes against the current relation state.
//!
//! Every node's output is memoized and stamped with the versions of the
//! relations its subtree scans, so a subplan shared between rules, between
//! a rule's variants, or across fixpoint rounds is computed once per
//! version, not once per use. Arrangements over a growing relation get a
//! cheaper path still: when the only dependency is one set relation's full
//! contents and the cache is exactly one version behind, the stage runs
//! over the rows added by that version and merges into the cached output.

use std::rc::Rc;

use super::collection::{antijoin, flat_map, join, join_flat_map, Collection};
use super::monoid::Diff;
use super::state::{RelContents, StateMap};
use crate::planner::{FilterCond, Op, PlanDag, ProjSource, Role};

/// A map stage directly over one full scan, eligible for incremental
/// maintenance.
#[derive(Debug, Clone)]
struct GrowingStage {
    relation: String,
    filters: Vec<FilterCond>,
    key: Vec<ProjSource>,
    val: Vec<ProjSource>,
}

struct CacheEntry<D> {
    stamps: Vec<u64>,
    out: Rc<Collection<D>>,
}

/// Work done at one dag node, cumulative over a run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OpCounters {
    /// Full evaluations; cache hits and merges do not count.
    pub builds: u64,
    /// Incremental updates folded into a cached arrangement.
    pub incremental_merges: u64,
    /// Rows produced by builds plus rows fed through merges.
    pub tuples: u64,
    /// Largest output this node ever held.
    pub peak_rows: usize,
}

pub struct Evaluator<'a, D> {
    dag: &'a PlanDag,
    workers: usize,
    cache: Vec<Option<CacheEntry<D>>>,
    /// Scan dependencies per node, in `scan_set` order.
    deps: Vec<Vec<(String, Role)>>,
    growing: Vec<Option<GrowingStage>>,
    counters: Vec<OpCounters>,
    arrangement: Vec<bool>,
}

impl<'a, D: Diff> Evaluator<'a, D> {
    pub fn new(dag: &'a PlanDag, workers: usize) -> Self {
        let n = dag.ops.len();
        let deps = (0..n).map(|id| dag.scan_set(id).into_iter().collect()).collect();

        let growing = dag
            .ops
            .iter()
            .map(|op| match op {
                Op::FlatMap { input, filters, key, val } => match &dag.ops[*input] {
                    Op::Scan { relation, role: Role::Full, .. } => Some(GrowingStage {
                        relation: relation.clone(),
                        filters: filters.clone(),
                        key: key.clone(),
                        val: val.clone(),
                    }),
                    _ => None,
                },
                _ => None,
            })
            .collect();

        let mut arrangement = vec![false; n];
        for op in &dag.ops {
            match op {
                Op::Join { left, right, .. }
                | Op::JoinFlatMap { left, right, .. }
                | Op::Antijoin { left, right, .. } => {
                    arrangement[*left] = true;
                    arrangement[*right] = true;
                }
                _ => {}
            }
        }

        Evaluator {
            dag,
            workers: workers.max(1),
            cache: (0..n).map(|_| None).collect(),
            deps,
            growing,
            counters: vec![OpCounters::default(); n],
            arrangement,
        }
    }

    fn stamps(&self, id: usize, states: &StateMap) -> Vec<u64> {
        self.deps[id]
            .iter()
            .map(|(relation, role)| states[relation].version(*role))
            .collect()
    }

    pub fn eval(&mut self, id: usize, states: &StateMap) -> Rc<Collection<D>> {
        let stamps = self.stamps(id, states);
        if let Some(entry) = &self.cache[id] {
            if entry.stamps == stamps {
                return Rc::clone(&entry.out);
            }
        }
        if let Some(out) = self.eval_incremental(id, states, &stamps) {
            return out;
        }

        let dag = self.dag;
        let kids: Vec<Rc<Collection<D>>> = dag.ops[id]
            .children()
            .into_iter()
            .map(|c| self.eval(c, states))
            .collect();
        let out = match &dag.ops[id] {
            Op::Scan { relation, role, .. } => states[relation].scan(*role),
            Op::FlatMap { filters, key, val, .. } => {
                flat_map(&kids[0], filters, key, val, self.workers)
            }
            Op::Join { key_len, .. } => join(&kids[0], &kids[1], *key_len, self.workers),
            Op::JoinFlatMap { key_len, filters, key, val, .. } => {
                join_flat_map(&kids[0], &kids[1], *key_len, filters, key, val, self.workers)
            }
            Op::Antijoin { key_len, .. } => {
                antijoin(&kids[0], &kids[1], *key_len, self.workers)
            }
        };

        let c = &mut self.counters[id];
        c.builds += 1;
        c.tuples += out.len() as u64;
        c.peak_rows = c.peak_rows.max(out.len());
        let out = Rc::new(out);
        self.cache[id] = Some(CacheEntry { stamps, out: Rc::clone(&out) });
        out
    }

    /// The one-version-behind fast path for a map over a growing relation.
    fn eval_incremental(
        &mut self,
        id: usize,
        states: &StateMap,
        stamps: &[u64],
    ) -> Option<Rc<Collection<D>>> {
        let stage = self.growing[id].as_ref()?;
        let entry = self.cache[id].as_ref()?;
        if !(stamps.len() == 1 && entry.stamps[0] + 1 == stamps[0]) {
            return None;
        }
        let RelContents::Set { last_added, .. } = &states[&stage.relation].contents else {
            return None;
        };
        let added = Collection::from_sorted(
            last_added.iter().map(|r| (r.clone(), D::one())).collect(),
        );
        let addition =
            flat_map(&added, &stage.filters, &stage.key, &stage.val, self.workers);
        let out = Rc::new(entry.out.merge(&addition));

        let c = &mut self.counters[id];
        c.incremental_merges += 1;
        c.tuples += addition.len() as u64;
        c.peak_rows = c.peak_rows.max(out.len());
        self.cache[id] = Some(CacheEntry { stamps: stamps.to_vec(), out: Rc::clone(&out) });
        Some(out)
    }

    pub fn counters(&self) -> &[OpCounters] {
        &self.counters
    }

    /// Is this node used as a join or antijoin input?
    pub fn is_arrangement(&self, id: usize) -> bool {
        self.arrangement[id]
    }
}
