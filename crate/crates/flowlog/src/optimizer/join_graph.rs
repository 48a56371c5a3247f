//! Weighted join graph of a rule body: one node per surviving positive
//! atom, an edge wherever two atoms share at least one variable, weighted
//! by how many they share.

use std::collections::{BTreeMap, BTreeSet};

use crate::frontend::RuleCatalog;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinNode {
    /// Index into the rule's body; doubles as the node's id.
    pub body_index: usize,
    /// Distinct variables in term order.
    pub vars: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JoinEdge {
    /// Endpoint body indexes, a < b.
    pub a: usize,
    pub b: usize,
    /// Number of shared variables, always >= 1.
    pub weight: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinGraph {
    /// Ascending by body index.
    pub nodes: Vec<JoinNode>,
    /// Ascending by (a, b).
    pub edges: Vec<JoinEdge>,
}

impl JoinGraph {
    pub fn build(catalog: &RuleCatalog) -> JoinGraph {
        let nodes: Vec<JoinNode> = catalog
            .nodes
            .iter()
            .map(|n| JoinNode { body_index: n.body_index, vars: n.vars.clone() })
            .collect();

        let mut edges = Vec::new();
        for (i, u) in nodes.iter().enumerate() {
            let uvars: BTreeSet<&str> = u.vars.iter().map(String::as_str).collect();
            for v in &nodes[i + 1..] {
                let weight = v.vars.iter().filter(|w| uvars.contains(w.as_str())).count();
                if weight >= 1 {
                    edges.push(JoinEdge { a: u.body_index, b: v.body_index, weight });
                }
            }
        }
        JoinGraph { nodes, edges }
    }

    pub fn node(&self, body_index: usize) -> &JoinNode {
        self.nodes.iter().find(|n| n.body_index == body_index).expect("node exists")
    }

    /// Adjacent node ids, ascending.
    pub fn neighbors(&self, body_index: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|e| match () {
                _ if e.a == body_index => Some(e.b),
                _ if e.b == body_index => Some(e.a),
                _ => None,
            })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn weight(&self, a: usize, b: usize) -> Option<usize> {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        self.edges.iter().find(|e| e.a == a && e.b == b).map(|e| e.weight)
    }

    /// Connected components, each ascending; ordered by descending size,
    /// then smallest member. Cross products only ever happen across
    /// components, so this is also the order they are joined in.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut assigned: BTreeMap<usize, usize> = BTreeMap::new();
        let mut comps: Vec<Vec<usize>> = Vec::new();
        for node in &self.nodes {
            if assigned.contains_key(&node.body_index) {
                continue;
            }
            let id = comps.len();
            let mut comp = vec![node.body_index];
            assigned.insert(node.body_index, id);
            let mut frontier = vec![node.body_index];
            while let Some(n) = frontier.pop() {
                for next in self.neighbors(n) {
                    if assigned.insert(next, id).is_none() {
                        comp.push(next);
                        frontier.push(next);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps.sort_by_key(|c| (std::cmp::Reverse(c.len()), c[0]));
        comps
    }
}
