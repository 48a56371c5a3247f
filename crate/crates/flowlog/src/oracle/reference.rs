//! Textbook graph algorithms used as ground truth, implemented with none of
//! the engine's machinery.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use std::fmt;

/// All pairs (x, y) with a directed path x -> ... -> y of length >= 1.
pub fn transitive_closure(edges: &BTreeSet<(i64, i64)>) -> BTreeSet<(i64, i64)> {
    let nodes: BTreeSet<i64> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
    let mut reach = edges.clone();
    for &k in &nodes {
        for &i in &nodes {
            if reach.contains(&(i, k)) {
                for &j in &nodes {
                    if reach.contains(&(k, j)) {
                        reach.insert((i, j));
                    }
                }
            }
        }
    }
    reach
}

/// Nodes that reach `target` along a walk of even length (including the
/// target itself at length zero): breadth-first search from the target on
/// the reversed two-step graph.
pub fn even_hop_ancestors(edges: &BTreeSet<(i64, i64)>, target: i64) -> BTreeSet<i64> {
    let mut out: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
    for &(x, y) in edges {
        out.entry(x).or_default().push(y);
    }
    let mut squared_rev: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
    for &(x, y) in edges {
        for &z in out.get(&y).into_iter().flatten() {
            squared_rev.entry(z).or_default().push(x);
        }
    }

    let mut seen: BTreeSet<i64> = [target].into();
    let mut queue: VecDeque<i64> = [target].into();
    while let Some(z) = queue.pop_front() {
        for &x in squared_rev.get(&z).into_iter().flatten() {
            if seen.insert(x) {
                queue.push_back(x);
            }
        }
    }
    seen
}

/// Each node labeled with the smallest node id of its connected component
/// (edges treated as undirected), via union-find.
pub fn min_label_components(
    nodes: &BTreeSet<i64>,
    edges: &BTreeSet<(i64, i64)>,
) -> BTreeMap<i64, i64> {
    let ids: Vec<i64> = nodes
        .iter()
        .copied()
        .chain(edges.iter().flat_map(|&(a, b)| [a, b]))
        .collect::<BTreeSet<i64>>()
        .into_iter()
        .collect();
    let index: BTreeMap<i64, usize> = ids.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let mut parent: Vec<usize> = (0..ids.len()).collect();

    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, index[&a]), find(&mut parent, index[&b]));
        parent[ra] = rb;
    }

    let mut label: BTreeMap<usize, i64> = BTreeMap::new();
    for &n in &ids {
        let root = find(&mut parent, index[&n]);
        let entry = label.entry(root).or_insert(n);
        *entry = (*entry).min(n);
    }
    ids.iter().map(|&n| (n, label[&find(&mut parent, index[&n])])).collect()
}

/// A directed edge with a negative weight, which Dijkstra cannot handle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NegativeWeight {
    pub src: i64,
    pub dst: i64,
    pub weight: i64,
}

impl fmt::Display for NegativeWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "negative edge weight {} on {} -> {}", self.weight, self.src, self.dst)
    }
}

impl std::error::Error for NegativeWeight {}

/// Shortest distances from `source` over weighted directed edges
/// (src, dst, weight); unreachable nodes are absent.
pub fn dijkstra(
    edges: &BTreeSet<(i64, i64, i64)>,
    source: i64,
) -> Result<BTreeMap<i64, i64>, NegativeWeight> {
    let mut out: BTreeMap<i64, Vec<(i64, i64)>> = BTreeMap::new();
    for &(src, dst, weight) in edges {
        if weight < 0 {
            return Err(NegativeWeight { src, dst, weight });
        }
        out.entry(src).or_default().push((dst, weight));
    }

    let mut dist: BTreeMap<i64, i64> = [(source, 0)].into();
    let mut heap: BinaryHeap<Reverse<(i64, i64)>> = [Reverse((0, source))].into();
    while let Some(Reverse((d, node))) = heap.pop() {
        if dist[&node] < d {
            continue;
        }
        for &(next, weight) in out.get(&node).into_iter().flatten() {
            let candidate = d + weight;
            if dist.get(&next).map_or(true, |&known| candidate < known) {
                dist.insert(next, candidate);
                heap.push(Reverse((candidate, next)));
            }
        }
    }
    Ok(dist)
}

/// Alternating breadth-first search from `seed`: false when some node is
/// reachable at both parities, i.e. an odd closed walk exists. On symmetric
/// edge sets this is exactly two-colorability of the seed's component.
pub fn two_colorable_from(edges: &BTreeSet<(i64, i64)>, seed: i64) -> bool {
    let mut out: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
    for &(x, y) in edges {
        out.entry(x).or_default().push(y);
    }
    let mut seen: BTreeSet<(i64, u8)> = [(seed, 0)].into();
    let mut queue: VecDeque<(i64, u8)> = [(seed, 0)].into();
    while let Some((node, parity)) = queue.pop_front() {
        for &next in out.get(&node).into_iter().flatten() {
            if seen.insert((next, 1 - parity)) {
                queue.push_back((next, 1 - parity));
            }
        }
    }
    !seen.iter().any(|&(node, parity)| parity == 0 && seen.contains(&(node, 1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set<T: Ord + Copy>(xs: &[T]) -> BTreeSet<T> {
        xs.iter().copied().collect()
    }

    #[test]
    fn closure_of_a_path_has_all_forward_pairs() {
        let tc = transitive_closure(&set(&[(1, 2), (2, 3), (3, 4)]));
        assert_eq!(tc, set(&[(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]));
    }

    #[test]
    fn even_hops_on_a_three_cycle_reach_everywhere() {
        let reach = even_hop_ancestors(&set(&[(1, 2), (2, 3), (3, 1)]), 3);
        assert_eq!(reach, set(&[1, 2, 3]));
    }

    #[test]
    fn odd_hops_only_are_excluded() {
        // 1 -> 2 -> 3: node 2 reaches 3 in one hop, never in an even count.
        let reach = even_hop_ancestors(&set(&[(1, 2), (2, 3)]), 3);
        assert_eq!(reach, set(&[1, 3]));
    }

    #[test]
    fn component_labels_are_minimum_ids() {
        let labels =
            min_label_components(&set(&[1, 2, 3, 7, 9]), &set(&[(1, 2), (2, 3), (7, 9)]));
        assert_eq!(
            labels,
            [(1, 1), (2, 1), (3, 1), (7, 7), (9, 7)].into_iter().collect()
        );
    }

    #[test]
    fn isolated_nodes_label_themselves() {
        let labels = min_label_components(&set(&[5]), &BTreeSet::new());
        assert_eq!(labels, [(5, 5)].into_iter().collect());
    }

    #[test]
    fn single_edge_distances() {
        let dist = dijkstra(&set(&[(10, 20, 5)]), 10).unwrap();
        assert_eq!(dist, [(10, 0), (20, 5)].into_iter().collect());
    }

    #[test]
    fn dijkstra_prefers_the_cheaper_detour() {
        let dist = dijkstra(&set(&[(1, 2, 10), (1, 3, 2), (3, 2, 3), (2, 4, 1)]), 1).unwrap();
        assert_eq!(dist, [(1, 0), (2, 5), (3, 2), (4, 6)].into_iter().collect());
    }

    #[test]
    fn negative_weights_are_rejected() {
        let err = dijkstra(&set(&[(1, 2, -4)]), 1).unwrap_err();
        assert_eq!(err, NegativeWeight { src: 1, dst: 2, weight: -4 });
    }

    #[test]
    fn triangle_is_not_two_colorable() {
        let sym = set(&[(1, 2), (2, 1), (2, 3), (3, 2), (3, 1), (1, 3)]);
        assert!(!two_colorable_from(&sym, 1));
    }

    #[test]
    fn even_cycle_is_two_colorable() {
        let sym = set(&[(1, 2), (2, 1), (2, 3), (3, 2), (3, 4), (4, 3), (4, 1), (1, 4)]);
        assert!(two_colorable_from(&sym, 1));
    }
}
