//! Every optimization switch and worker count must leave results
//! untouched; only performance may change.

mod common;

use common::{engine_db, inputs_for, toggle_matrix, PROGRAMS};
use flowlog::{compile, Options};

const SEEDS: std::ops::Range<u64> = 0..10;

fn source_of(name: &str) -> &'static str {
    PROGRAMS.iter().find(|(n, _)| *n == name).unwrap().1
}

/// All 32 switch combinations produce the database of the default run.
fn toggles_preserve(name: &str) {
    let source = source_of(name);
    for seed in SEEDS {
        let inputs = inputs_for(name, seed);
        let base = engine_db(source, &inputs, &Options::default());
        for options in toggle_matrix() {
            let got = engine_db(source, &inputs, &options);
            assert_eq!(got, base, "{name} seed {seed} under {options:?}");
        }
    }
}

/// Worker counts 1, 2, 4 agree on the database and on how many rows
/// each rule derived.
fn workers_preserve(name: &str) {
    let source = source_of(name);
    for seed in SEEDS {
        let inputs = inputs_for(name, seed);
        let runs: Vec<_> = [1usize, 2, 4]
            .iter()
            .map(|&workers| {
                let options = Options { workers, ..Options::default() };
                let compiled = compile(source, &options).unwrap();
                let result = compiled.run(&inputs).unwrap();
                let derived: Vec<(usize, String, u64)> = result
                    .stats
                    .rules
                    .iter()
                    .map(|r| (r.rule_id, r.relation.clone(), r.derived))
                    .collect();
                (result.database, derived)
            })
            .collect();
        for (i, run) in runs.iter().enumerate().skip(1) {
            assert_eq!(run.0, runs[0].0, "{name} seed {seed}: databases differ at W={}", [1, 2, 4][i]);
            assert_eq!(run.1, runs[0].1, "{name} seed {seed}: rule counts differ at W={}", [1, 2, 4][i]);
        }
    }
}

#[test]
fn reach_even_is_toggle_invariant() {
    toggles_preserve("reach_even");
}

#[test]
fn tc_is_toggle_invariant() {
    toggles_preserve("tc");
}

#[test]
fn sg_is_toggle_invariant() {
    toggles_preserve("sg");
}

#[test]
fn cc_is_toggle_invariant() {
    toggles_preserve("cc");
}

#[test]
fn sssp_is_toggle_invariant() {
    toggles_preserve("sssp");
}

#[test]
fn bipartite_is_toggle_invariant() {
    toggles_preserve("bipartite");
}

#[test]
fn galen_is_toggle_invariant() {
    toggles_preserve("galen");
}

#[test]
fn two_hops_count_is_toggle_invariant() {
    toggles_preserve("two_hops_count");
}

#[test]
fn negation_is_toggle_invariant() {
    toggles_preserve("negation");
}

#[test]
fn reach_even_is_worker_invariant() {
    workers_preserve("reach_even");
}

#[test]
fn tc_is_worker_invariant() {
    workers_preserve("tc");
}

#[test]
fn sg_is_worker_invariant() {
    workers_preserve("sg");
}

#[test]
fn cc_is_worker_invariant() {
    workers_preserve("cc");
}

#[test]
fn sssp_is_worker_invariant() {
    workers_preserve("sssp");
}

#[test]
fn bipartite_is_worker_invariant() {
    workers_preserve("bipartite");
}

#[test]
fn galen_is_worker_invariant() {
    workers_preserve("galen");
}

#[test]
fn two_hops_count_is_worker_invariant() {
    workers_preserve("two_hops_count");
}

#[test]
fn negation_is_worker_invariant() {
    workers_preserve("negation");
}
