//! The stratified semi-naive fixpoint over planned rules.
//!
//! Strata run in dependency order. A stratum starts by evaluating every
//! rule's base variant against the state it inherited; whatever is new
//! becomes the first delta. Recursive strata then iterate: each round
//! evaluates every delta variant (one per recursive body occurrence),
//! collects candidate rows, keeps those not already known (or strictly
//! better, for lattice relations), merges them, and stops when a round
//! adds nothing. One swap per variant suffices because the accumulated
//! contents always include the previous round's delta.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::collection::{Collection, Row};
use super::eval::Evaluator;
use super::monoid::{Count, Diff, Presence};
use super::state::{load, Database, StateMap};
use crate::frontend::{AggregateFunc, Program, Stratification};
use crate::planner::PlannedProgram;

#[derive(Debug, Clone)]
pub struct EngineOptions {
    pub workers: usize,
    /// Cap on rounds per stratum; arithmetic through lattices can diverge.
    pub max_iterations: Option<u64>,
    /// Carry derivation counts instead of bare presence.
    pub count_diffs: bool,
}

impl Default for EngineOptions {
    fn default() -> EngineOptions {
        EngineOptions { workers: 1, max_iterations: None, count_diffs: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    IterationLimit { stratum: usize, limit: u64 },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::IterationLimit { stratum, limit } => {
                write!(f, "stratum {stratum} did not converge within {limit} rounds")
            }
        }
    }
}

impl std::error::Error for EvalError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StratumStats {
    pub stratum: usize,
    pub recursive: bool,
    pub rounds: u64,
    /// New facts merged per round, round 0 first.
    pub new_facts_per_round: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubplanStats {
    pub op: usize,
    pub kind: &'static str,
    pub description: String,
    /// Whether the node feeds a join or antijoin.
    pub arrangement: bool,
    pub builds: u64,
    pub incremental_merges: u64,
    pub tuples: u64,
    pub peak_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleStats {
    pub rule_id: usize,
    pub relation: String,
    /// Rows the rule's variants emitted across all rounds, new or not.
    pub derived: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalStats {
    pub strata: Vec<StratumStats>,
    pub subplans: Vec<SubplanStats>,
    pub rules: Vec<RuleStats>,
}

#[derive(Debug, Clone)]
pub struct EvalResult {
    /// Final contents of every relation, inputs included.
    pub database: Database,
    pub stats: EvalStats,
}

/// Run a planned program over the given inputs.
pub fn evaluate(
    program: &Program,
    planned: &PlannedProgram,
    strat: &Stratification,
    inputs: &Database,
    options: &EngineOptions,
) -> Result<EvalResult, EvalError> {
    if options.count_diffs {
        run::<Count>(program, planned, strat, inputs, options)
    } else {
        run::<Presence>(program, planned, strat, inputs, options)
    }
}

fn run<D: Diff>(
    program: &Program,
    planned: &PlannedProgram,
    strat: &Stratification,
    inputs: &Database,
    options: &EngineOptions,
) -> Result<EvalResult, EvalError> {
    let dag = &planned.dag;
    let mut states = load(program, inputs);
    let mut evaluator: Evaluator<D> = Evaluator::new(dag, options.workers);
    let mut rule_derived = vec![0u64; program.rules.len()];
    let mut strata = Vec::with_capacity(strat.strata.len());

    for (s, stratum_rules) in strat.strata.iter().enumerate() {
        let defined = strat.defined_in(program, s);
        let mut per_round = Vec::new();

        // Round 0: base variants against the inherited state.
        let mut candidates: BTreeMap<&str, Vec<Row>> = BTreeMap::new();
        for &rid in stratum_rules {
            let plans = &dag.rules[rid];
            debug_assert_eq!(plans.rule_id, rid);
            debug_assert!(plans.variants[0].delta_at.is_none());
            let out = evaluator.eval(plans.variants[0].root, &states);
            let rows = boundary(program, &plans.relation, &out);
            rule_derived[rid] += rows.len() as u64;
            candidates.entry(plans.relation.as_str()).or_default().extend(rows);
        }
        per_round.push(apply_round(&mut states, &defined, candidates));

        if strat.recursive[s] {
            while *per_round.last().expect("round 0 ran") > 0 {
                if let Some(limit) = options.max_iterations {
                    if per_round.len() as u64 >= limit {
                        return Err(EvalError::IterationLimit { stratum: s, limit });
                    }
                }
                let mut candidates: BTreeMap<&str, Vec<Row>> = BTreeMap::new();
                for &rid in stratum_rules {
                    let plans = &dag.rules[rid];
                    for variant in &plans.variants[1..] {
                        let out = evaluator.eval(variant.root, &states);
                        let rows = boundary(program, &plans.relation, &out);
                        rule_derived[rid] += rows.len() as u64;
                        candidates.entry(plans.relation.as_str()).or_default().extend(rows);
                    }
                }
                per_round.push(apply_round(&mut states, &defined, candidates));
            }
        }

        for rel in &defined {
            states.get_mut(*rel).expect("defined relation exists").clear_delta();
        }
        strata.push(StratumStats {
            stratum: s,
            recursive: strat.recursive[s],
            rounds: per_round.len() as u64,
            new_facts_per_round: per_round,
        });
    }

    let database = states.iter().map(|(name, st)| (name.clone(), st.rows())).collect();
    let subplans = evaluator
        .counters()
        .iter()
        .enumerate()
        .map(|(op, c)| SubplanStats {
            op,
            kind: dag.ops[op].kind(),
            description: dag.render(op),
            arrangement: evaluator.is_arrangement(op),
            builds: c.builds,
            incremental_merges: c.incremental_merges,
            tuples: c.tuples,
            peak_rows: c.peak_rows,
        })
        .collect();
    let rules = program
        .rules
        .iter()
        .map(|r| RuleStats {
            rule_id: r.id,
            relation: r.head.relation.clone(),
            derived: rule_derived[r.id],
        })
        .collect();
    Ok(EvalResult { database, stats: EvalStats { strata, subplans, rules } })
}

/// Merge one round's candidates into every relation the stratum defines,
/// replacing all their deltas; returns how many facts were new.
fn apply_round(
    states: &mut StateMap,
    defined: &BTreeSet<&str>,
    mut candidates: BTreeMap<&str, Vec<Row>>,
) -> usize {
    let mut new = 0;
    for &rel in defined {
        let rows = candidates.remove(rel).unwrap_or_default();
        new += states.get_mut(rel).expect("defined relation exists").apply_candidates(rows);
    }
    debug_assert!(candidates.is_empty(), "candidates for a relation outside the stratum");
    new
}

/// From a variant's output collection to candidate rows: drop diffs (the
/// distinct step) and fold COUNT/SUM groups. Lattice folding happens in
/// the relation state instead, where the current best values live.
fn boundary<D: Diff>(program: &Program, relation: &str, out: &Collection<D>) -> Vec<Row> {
    let rows: Vec<Row> = out.rows.iter().map(|(r, _)| r.clone()).collect();
    match program.relation(relation).aggregate {
        Some(AggregateFunc::Count) => fold_groups(rows, |values| values.len() as i64),
        Some(AggregateFunc::Sum) => fold_groups(rows, |values| values.iter().sum()),
        _ => rows,
    }
}

/// Fold the last column over runs that share the leading group columns.
/// Rows are sorted, so each group's distinct values are adjacent.
fn fold_groups(rows: Vec<Row>, fold: impl Fn(&[i64]) -> i64) -> Vec<Row> {
    let mut out = Vec::new();
    let mut values: Vec<i64> = Vec::new();
    let mut current: Option<Row> = None;
    for row in rows {
        let (value, group) = row.split_last().expect("aggregate output has a value column");
        if current.as_deref() != Some(group) {
            if let Some(mut g) = current.take() {
                g.push(fold(&values));
                out.push(g);
            }
            current = Some(Row::from_slice(group));
            values.clear();
        }
        values.push(*value);
    }
    if let Some(mut g) = current {
        g.push(fold(&values));
        out.push(g);
    }
    out
}
