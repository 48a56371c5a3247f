//! Seeded random graph instances for differential tests.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// How many edges a generated graph gets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Density {
    /// Each ordered pair becomes an edge independently with this probability.
    Prob(f64),
    /// Exactly this many edges, sampled without replacement (clamped to the
    /// number of available pairs).
    Count(usize),
}

/// Deterministic description of a random graph: equal specs generate equal
/// graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomGraphSpec {
    pub nodes: usize,
    pub density: Density,
    pub seed: u64,
    /// Draw weights from 1..=20 instead of fixing them at 1.
    pub weighted: bool,
    pub self_loops: bool,
}

impl RandomGraphSpec {
    pub fn sparse(nodes: usize, prob: f64, seed: u64) -> Self {
        RandomGraphSpec { nodes, density: Density::Prob(prob), seed, weighted: false, self_loops: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Edge {
    pub src: i64,
    pub dst: i64,
    pub weight: i64,
}

/// Generate the spec'd graph. Node ids are 0..nodes; isolated nodes are
/// possible and intended.
pub fn generate_graph(spec: &RandomGraphSpec) -> Vec<Edge> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.nodes as i64;
    let mut pairs: Vec<(i64, i64)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| spec.self_loops || i != j)
        .collect();

    let chosen: Vec<(i64, i64)> = match spec.density {
        Density::Prob(p) => pairs.into_iter().filter(|_| rng.gen_bool(p)).collect(),
        Density::Count(c) => {
            pairs.shuffle(&mut rng);
            pairs.truncate(c);
            pairs.sort_unstable();
            pairs
        }
    };

    chosen
        .into_iter()
        .map(|(src, dst)| Edge {
            src,
            dst,
            weight: if spec.weighted { rng.gen_range(1..=20) } else { 1 },
        })
        .collect()
}
