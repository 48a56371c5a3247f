//! Engine output versus the naive evaluator and classical graph
//! algorithms on seeded random instances.

mod common;

use common::check_instance;

const SEEDS: std::ops::Range<u64> = 0..16;

fn differential(name: &str) {
    for seed in SEEDS {
        check_instance(name, seed);
    }
}

#[test]
fn reach_even_matches_the_oracles() {
    differential("reach_even");
}

#[test]
fn tc_matches_the_oracles() {
    differential("tc");
}

#[test]
fn sg_matches_the_naive_evaluator() {
    differential("sg");
}

#[test]
fn cc_matches_the_oracles() {
    differential("cc");
}

#[test]
fn sssp_matches_the_oracles() {
    differential("sssp");
}

#[test]
fn bipartite_matches_the_oracles() {
    differential("bipartite");
}

#[test]
fn galen_matches_the_naive_evaluator() {
    differential("galen");
}

#[test]
fn two_hops_count_matches_the_naive_evaluator() {
    differential("two_hops_count");
}

#[test]
fn negation_matches_the_naive_evaluator() {
    differential("negation");
}
