//! Rule dependency graph and stratification.
//!
//! Nodes are rules; an edge r1 -> r2 exists when r1's head relation occurs
//! in r2's body. An edge is flagged when any such occurrence is negated, or
//! when r2 carries a COUNT/SUM head aggregate (those must see their inputs
//! complete; MIN/MAX recurse through the lattice path instead). Strata are
//! the strongly connected components in topological order, and a flagged
//! edge inside a component makes the program unstratifiable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::ast::{Program, RelationKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    pub rule_count: usize,
    pub edges: BTreeSet<(usize, usize)>,
    /// Subset of `edges` whose consuming occurrence is negated or feeds a
    /// COUNT/SUM aggregate.
    pub flagged: BTreeSet<(usize, usize)>,
}

impl DependencyGraph {
    pub fn build(program: &Program) -> Self {
        let mut edges = BTreeSet::new();
        let mut flagged = BTreeSet::new();
        for producer in &program.rules {
            let head = &producer.head.relation;
            for consumer in &program.rules {
                let mut depends = false;
                let mut flag = false;
                for atom in &consumer.body {
                    if &atom.relation == head {
                        depends = true;
                        if atom.negated {
                            flag = true;
                        }
                    }
                }
                if depends {
                    if consumer.aggregate.as_ref().is_some_and(|a| !a.func.is_lattice()) {
                        flag = true;
                    }
                    edges.insert((producer.id, consumer.id));
                    if flag {
                        flagged.insert((producer.id, consumer.id));
                    }
                }
            }
        }
        DependencyGraph { rule_count: program.rules.len(), edges, flagged }
    }

    pub fn successors(&self, rule: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .range((rule, 0)..(rule + 1, 0))
            .map(|&(_, to)| to)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnstratifiableProgram {
    /// Rules of the offending component, ascending.
    pub rules: Vec<usize>,
    pub message: String,
}

impl fmt::Display for UnstratifiableProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unstratifiable program: {} (rules {:?})", self.message, self.rules)
    }
}

impl std::error::Error for UnstratifiableProgram {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stratification {
    /// Rule ids per stratum, ascending within a stratum; strata in
    /// topological order.
    pub strata: Vec<Vec<usize>>,
    pub rule_stratum: Vec<usize>,
    /// Every IDB mapped to the last stratum that defines it.
    pub relation_stratum: BTreeMap<String, usize>,
    /// Per stratum: does its component contain a cycle?
    pub recursive: Vec<bool>,
}

impl Stratification {
    pub fn is_recursive_rule(&self, rule: usize) -> bool {
        self.recursive[self.rule_stratum[rule]]
    }

    /// Relations defined by rules of this stratum.
    pub fn defined_in<'a>(&self, program: &'a Program, stratum: usize) -> BTreeSet<&'a str> {
        self.strata[stratum]
            .iter()
            .map(|&r| program.rules[r].head.relation.as_str())
            .collect()
    }
}

/// Tarjan's algorithm, iterative, visiting rules in ascending id order so
/// the component order (and thus the stratum numbering) is deterministic.
fn strongly_connected_components(graph: &DependencyGraph) -> Vec<Vec<usize>> {
    let n = graph.rule_count;
    let succ: Vec<Vec<usize>> = (0..n).map(|r| graph.successors(r).collect()).collect();

    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut components: Vec<Vec<usize>> = Vec::new();

    for start in 0..n {
        if index[start] != usize::MAX {
            continue;
        }
        // Explicit DFS frames: (node, next successor position).
        let mut frames = vec![(start, 0usize)];
        index[start] = next_index;
        low[start] = next_index;
        next_index += 1;
        stack.push(start);
        on_stack[start] = true;

        while let Some(&mut (v, ref mut pos)) = frames.last_mut() {
            if *pos < succ[v].len() {
                let w = succ[v][*pos];
                *pos += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                frames.pop();
                if let Some(&(parent, _)) = frames.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut component = Vec::new();
                    loop {
                        let w = stack.pop().expect("scc stack underflow");
                        on_stack[w] = false;
                        component.push(w);
                        if w == v {
                            break;
                        }
                    }
                    component.sort_unstable();
                    components.push(component);
                }
            }
        }
    }
    // Tarjan emits components in reverse topological order.
    components.reverse();
    components
}

pub fn stratify(
    program: &Program,
    graph: &DependencyGraph,
) -> Result<Stratification, UnstratifiableProgram> {
    let strata = strongly_connected_components(graph);

    let mut rule_stratum = vec![0usize; graph.rule_count];
    for (s, rules) in strata.iter().enumerate() {
        for &r in rules {
            rule_stratum[r] = s;
        }
    }

    for &(from, to) in &graph.flagged {
        if rule_stratum[from] == rule_stratum[to] {
            let stratum = rule_stratum[from];
            let negated = program.rules[to]
                .body
                .iter()
                .any(|a| a.negated && a.relation == program.rules[from].head.relation);
            let message = if negated {
                format!(
                    "rule {to} negates {}, which is derived within the same component",
                    program.rules[from].head.relation
                )
            } else {
                format!(
                    "rule {to} aggregates with COUNT/SUM over {}, which is derived within the same component",
                    program.rules[from].head.relation
                )
            };
            return Err(UnstratifiableProgram { rules: strata[stratum].clone(), message });
        }
    }

    let recursive = strata
        .iter()
        .map(|rules| {
            rules.len() > 1 || rules.iter().any(|&r| graph.edges.contains(&(r, r)))
        })
        .collect();

    let mut relation_stratum = BTreeMap::new();
    for (name, info) in &program.relations {
        if info.kind == RelationKind::Idb {
            let last = program
                .rules
                .iter()
                .filter(|r| &r.head.relation == name)
                .map(|r| rule_stratum[r.id])
                .max()
                .expect("IDB has a defining rule");
            relation_stratum.insert(name.clone(), last);
        }
    }

    Ok(Stratification { strata, rule_stratum, relation_stratum, recursive })
}
