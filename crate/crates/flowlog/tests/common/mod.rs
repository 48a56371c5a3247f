//! The benchmark corpus shared by the integration suites: nine programs
//! and a seeded instance builder for each.

// Each test binary compiles this module separately and none uses all of it.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use flowlog::engine::Database;
use flowlog::oracle::{
    dijkstra, even_hop_ancestors, generate_graph, min_label_components, naive_evaluate,
    transitive_closure, two_colorable_from, Density, RandomGraphSpec,
};
use flowlog::{compile, Options};

pub const REACH_EVEN: &str = "\
.decl edge(a: number, b: number)
.decl target(a: number)
.decl reach(a: number)
.input edge
.input target
.output reach
reach(x) :- target(x).
reach(x) :- edge(x, y), edge(y, z), reach(z).
";

pub const TC: &str = "\
.decl edge(a: number, b: number)
.decl tc(a: number, b: number)
.input edge
.output tc
tc(x, y) :- edge(x, y).
tc(x, z) :- tc(x, y), tc(y, z).
";

pub const SG: &str = "\
.decl edge(a: number, b: number)
.decl sg(a: number, b: number)
.input edge
.output sg
sg(x, y) :- edge(p, x), edge(p, y), x != y.
sg(x, y) :- edge(a, x), sg(a, b), edge(b, y).
";

pub const CC: &str = "\
.decl node(a: number)
.decl edge(a: number, b: number)
.decl bi(a: number, b: number)
.decl label(a: number, l: number)
.input node
.input edge
.output label
bi(x, y) :- edge(x, y).
bi(y, x) :- edge(x, y).
label(x, MIN(x)) :- node(x).
label(y, MIN(l)) :- label(x, l), bi(x, y).
";

pub const SSSP: &str = "\
.decl edge(a: number, b: number, w: number)
.decl source(a: number)
.decl dist(a: number, d: number)
.input edge
.input source
.output dist
dist(x, MIN(0)) :- source(x).
dist(y, MIN(d + w)) :- dist(x, d), edge(x, y, w).
";

pub const BIPARTITE: &str = "\
.decl edge(a: number, b: number)
.decl seed(a: number)
.decl bi(a: number, b: number)
.decl red(a: number)
.decl blue(a: number)
.decl answer()
.input edge
.input seed
.output answer
bi(x, y) :- edge(x, y).
bi(y, x) :- edge(x, y).
red(x) :- seed(x).
blue(y) :- red(x), bi(x, y).
red(y) :- blue(x), bi(x, y).
answer() :- red(x), blue(x).
";

pub const GALEN: &str = "\
.decl p_in(a: number, b: number)
.decl q_in(a: number, b: number, c: number)
.decl c(a: number, b: number, c: number)
.decl u(a: number, b: number, c: number)
.decl s(a: number, b: number)
.decl r(a: number, b: number, c: number)
.decl p(a: number, b: number)
.decl q(a: number, b: number, c: number)
.input p_in
.input q_in
.input c
.input u
.input s
.input r
.output p
.output q
p(x, y) :- p_in(x, y).
q(x, y, z) :- q_in(x, y, z).
p(x, z) :- p(x, y), p(y, z).
p(x, z) :- p(y, w), u(w, r, z), q(x, r, y).
p(x, z) :- c(y, w, z), p(x, w), p(x, y).
q(x, r, z) :- p(x, y), q(y, r, z).
q(x, u, z) :- q(x, r, z), s(r, u).
q(x, e, o) :- q(x, y, z), r(y, u, e), q(z, u, o).
";

pub const TWO_HOPS_COUNT: &str = "\
.decl edge(a: number, b: number)
.decl two_hops(a: number, b: number, n: number)
.input edge
.output two_hops
two_hops(x, z, COUNT(y)) :- edge(x, y), edge(y, z).
";

pub const NEGATION: &str = "\
.decl edge(a: number, b: number)
.decl gap(a: number, b: number)
.input edge
.output gap
gap(x, z) :- edge(x, y), edge(y, z), !edge(x, z), x != z.
";

pub const PROGRAMS: &[(&str, &str)] = &[
    ("reach_even", REACH_EVEN),
    ("tc", TC),
    ("sg", SG),
    ("cc", CC),
    ("sssp", SSSP),
    ("bipartite", BIPARTITE),
    ("galen", GALEN),
    ("two_hops_count", TWO_HOPS_COUNT),
    ("negation", NEGATION),
];

/// Instance sizes cycle with the seed so every suite sees both tiny
/// graphs (edge cases) and ones in the low hundreds of nodes.
fn spec_for(seed: u64, max_nodes: usize) -> RandomGraphSpec {
    const SIZES: [usize; 10] = [4, 6, 9, 14, 20, 30, 50, 80, 120, 200];
    const DEGREES: [f64; 3] = [1.0, 2.0, 3.0];
    let nodes = SIZES[(seed % 10) as usize].min(max_nodes);
    let prob = (DEGREES[(seed % 3) as usize] / nodes as f64).min(1.0);
    RandomGraphSpec { nodes, density: Density::Prob(prob), seed, weighted: false, self_loops: false }
}

fn edge_pairs(spec: &RandomGraphSpec) -> BTreeSet<Vec<i64>> {
    generate_graph(spec).into_iter().map(|e| vec![e.src, e.dst]).collect()
}

fn random_rows(rng: &mut ChaCha8Rng, arity: usize, count: usize, nodes: i64) -> BTreeSet<Vec<i64>> {
    (0..count)
        .map(|_| (0..arity).map(|_| rng.gen_range(0..nodes)).collect())
        .collect()
}

/// Seeded inputs for the named corpus program.
pub fn inputs_for(name: &str, seed: u64) -> Database {
    let mut db = Database::new();
    match name {
        "reach_even" => {
            db.insert("edge".into(), edge_pairs(&spec_for(seed, 200)));
            db.insert("target".into(), BTreeSet::from([vec![0]]));
        }
        "tc" | "negation" | "two_hops_count" => {
            db.insert("edge".into(), edge_pairs(&spec_for(seed, 200)));
        }
        "sg" => {
            db.insert("edge".into(), edge_pairs(&spec_for(seed, 60)));
        }
        "cc" => {
            let spec = spec_for(seed, 200);
            db.insert("node".into(), (0..spec.nodes as i64).map(|n| vec![n]).collect());
            db.insert("edge".into(), edge_pairs(&spec));
        }
        "sssp" => {
            let spec = RandomGraphSpec { weighted: true, ..spec_for(seed, 150) };
            db.insert(
                "edge".into(),
                generate_graph(&spec).into_iter().map(|e| vec![e.src, e.dst, e.weight]).collect(),
            );
            db.insert("source".into(), BTreeSet::from([vec![0]]));
        }
        "bipartite" => {
            db.insert("edge".into(), edge_pairs(&spec_for(seed, 200)));
            db.insert("seed".into(), BTreeSet::from([vec![0]]));
        }
        "galen" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(31).wrapping_add(7));
            let n = 4 + (seed % 7) as i64;
            let k = n as usize;
            db.insert("p_in".into(), random_rows(&mut rng, 2, k, n));
            db.insert("q_in".into(), random_rows(&mut rng, 3, k / 2, n));
            db.insert("c".into(), random_rows(&mut rng, 3, k, n));
            db.insert("u".into(), random_rows(&mut rng, 3, k, n));
            db.insert("s".into(), random_rows(&mut rng, 2, k / 2, n));
            db.insert("r".into(), random_rows(&mut rng, 3, k, n));
        }
        other => panic!("no instance builder for {other}"),
    }
    db
}

/// Compile with `options` and evaluate. The result is restricted to the
/// relations the source declares, hiding rewrite-internal ones.
pub fn engine_db(source: &str, inputs: &Database, options: &Options) -> Database {
    let declared = flowlog::frontend::parse_program(source).expect("corpus program parses");
    let compiled = compile(source, options).expect("corpus program compiles");
    let mut db = compiled.run(inputs).expect("corpus run succeeds").database;
    db.retain(|name, _| declared.relations.contains_key(name));
    db
}

/// The naive evaluator's full database for the same program.
pub fn naive_db(source: &str, inputs: &Database) -> Database {
    let program = flowlog::frontend::parse_program(source).expect("corpus program parses");
    naive_evaluate(&program, inputs).expect("corpus program stratifies")
}

/// Project a binary relation out of a database as tuples.
pub fn pairs(db: &Database, relation: &str) -> BTreeSet<(i64, i64)> {
    db.get(relation)
        .map(|rows| rows.iter().map(|r| (r[0], r[1])).collect())
        .unwrap_or_default()
}

/// Project a ternary relation out of a database as tuples.
pub fn triples(db: &Database, relation: &str) -> BTreeSet<(i64, i64, i64)> {
    db.get(relation)
        .map(|rows| rows.iter().map(|r| (r[0], r[1], r[2])).collect())
        .unwrap_or_default()
}

pub fn source_of(name: &str) -> &'static str {
    PROGRAMS.iter().find(|(n, _)| *n == name).unwrap().1
}

/// Engine == naive evaluator on this seed, and == the classical
/// algorithm for the programs that have one.
pub fn check_instance(name: &str, seed: u64) {
    let source = source_of(name);
    let inputs = inputs_for(name, seed);
    let engine = engine_db(source, &inputs, &Options::default());
    let naive = naive_db(source, &inputs);
    assert_eq!(engine, naive, "{name} seed {seed}: engine vs naive");
    check_reference(name, &inputs, &engine, seed);
}

/// Compare a database against the classical algorithm for `name`, when
/// one exists.
pub fn check_reference(name: &str, inputs: &Database, db: &Database, seed: u64) {
    match name {
        "tc" => {
            let edges = pairs(inputs, "edge");
            assert_eq!(pairs(db, "tc"), transitive_closure(&edges), "tc seed {seed}");
        }
        "reach_even" => {
            let edges = pairs(inputs, "edge");
            let reach: BTreeSet<i64> = db["reach"].iter().map(|r| r[0]).collect();
            assert_eq!(reach, even_hop_ancestors(&edges, 0), "reach_even seed {seed}");
        }
        "cc" => {
            let nodes: BTreeSet<i64> = inputs["node"].iter().map(|r| r[0]).collect();
            let edges = pairs(inputs, "edge");
            let labels: BTreeSet<(i64, i64)> =
                min_label_components(&nodes, &edges).into_iter().collect();
            assert_eq!(pairs(db, "label"), labels, "cc seed {seed}");
        }
        "sssp" => {
            let edges = triples(inputs, "edge");
            let dist: BTreeSet<(i64, i64)> = dijkstra(&edges, 0).unwrap().into_iter().collect();
            assert_eq!(pairs(db, "dist"), dist, "sssp seed {seed}");
        }
        "bipartite" => {
            let mut sym = pairs(inputs, "edge");
            sym.extend(sym.clone().into_iter().map(|(x, y)| (y, x)));
            let colorable = two_colorable_from(&sym, 0);
            assert_eq!(db["answer"].is_empty(), colorable, "bipartite seed {seed}");
        }
        _ => {}
    }
}

/// All 32 on/off combinations of the five semantics-preserving switches.
pub fn toggle_matrix() -> Vec<Options> {
    let mut all = Vec::new();
    for bits in 0..32u32 {
        all.push(Options {
            optimize_joins: bits & 1 == 0,
            sip: if bits & 2 == 0 { flowlog::SipMode::Auto } else { flowlog::SipMode::Off },
            fuse: bits & 4 == 0,
            share: bits & 8 == 0,
            count_diffs: bits & 16 != 0,
            ..Options::default()
        });
    }
    all
}
