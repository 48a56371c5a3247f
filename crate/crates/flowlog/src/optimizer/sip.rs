//! Sideways information passing: rewrite a multi-way join into a cascade
//! of auxiliary filter relations so every join input is pre-reduced by its
//! neighbors before the final join runs.
//!
//! Two passes over a visit order of the join atoms. The forward pass
//! filters each atom by its already-visited neighbors; the backward pass
//! filters it by the later-visited ones. The reduced rule then joins the
//! final filtered relations and keeps the original head, so skewed
//! intermediate results shrink without changing what the rule derives.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::frontend::{
    build_rule_catalog, Atom, Program, RelationInfo, RelationKind, Rule, Stratification, Term,
};

use super::join_graph::JoinGraph;

/// When the rewrite runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SipMode {
    /// Recursive rules with at least three join atoms: where reduction
    /// pays for the extra relations.
    #[default]
    Auto,
    /// Every rule with at least two join atoms.
    ForceOn,
    Off,
}

/// The rule has fewer than two join atoms; there is nothing to reduce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NotApplicable;

impl fmt::Display for NotApplicable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("rule has fewer than two join atoms; nothing to reduce")
    }
}

impl std::error::Error for NotApplicable {}

/// Result of rewriting one rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SipRewrite {
    /// Auxiliary rules in emission order: forward pass, then backward.
    pub aux_rules: Vec<Rule>,
    /// (name, arity) of each auxiliary relation, in emission order.
    pub aux_relations: Vec<(String, usize)>,
    /// Same head and id as the input rule; body joins the final filtered
    /// relations, then re-attaches semijoins, negations, and constraints.
    pub reduced_rule: Rule,
}

/// Breadth-first visit order: start each component at the atom with the
/// most variables (ties to the earliest), then expand by body index.
pub fn default_visit_order(graph: &JoinGraph) -> Vec<usize> {
    let mut order = Vec::new();
    for comp in graph.components() {
        let start = comp
            .iter()
            .copied()
            .max_by_key(|&n| (graph.node(n).vars.len(), std::cmp::Reverse(n)))
            .expect("components are non-empty");
        let mut seen: BTreeSet<usize> = [start].into();
        let mut queue = VecDeque::from([start]);
        while let Some(n) = queue.pop_front() {
            order.push(n);
            for m in graph.neighbors(n) {
                if seen.insert(m) {
                    queue.push_back(m);
                }
            }
        }
    }
    order
}

/// Rewrite one rule along `visit_order` (a permutation of the join
/// graph's body indexes).
pub fn sip_rewrite(
    rule: &Rule,
    graph: &JoinGraph,
    visit_order: &[usize],
) -> Result<SipRewrite, NotApplicable> {
    if graph.nodes.len() < 2 {
        return Err(NotApplicable);
    }
    debug_assert_eq!(
        {
            let mut v = visit_order.to_vec();
            v.sort_unstable();
            v
        },
        graph.nodes.iter().map(|n| n.body_index).collect::<Vec<_>>(),
        "visit order must permute the join nodes",
    );

    let mut state = Rewrite {
        rule,
        finals: graph
            .nodes
            .iter()
            .map(|n| (n.body_index, rule.body[n.body_index].clone()))
            .collect(),
        fresh: 0,
        aux_rules: Vec::new(),
        aux_relations: Vec::new(),
    };

    // Forward: reduce each atom by the already-visited neighbors.
    for (pos, &node) in visit_order.iter().enumerate() {
        let reducers: Vec<usize> = visit_order[..pos]
            .iter()
            .copied()
            .filter(|&m| graph.weight(node, m).is_some())
            .collect();
        if !reducers.is_empty() {
            state.emit(node, &reducers, Pass::Forward);
        }
    }

    // Backward: reduce each atom by the later-visited neighbors, walking
    // the order in reverse so reducers are already in final form.
    for (pos, &node) in visit_order.iter().enumerate().rev() {
        let reducers: Vec<usize> = visit_order[pos + 1..]
            .iter()
            .rev()
            .copied()
            .filter(|&m| graph.weight(node, m).is_some())
            .collect();
        if !reducers.is_empty() {
            state.emit(node, &reducers, Pass::Backward);
        }
    }

    // Reduced body: final atoms in visit order, then the demoted and
    // negated atoms of the original body, then every constraint.
    let node_set: BTreeSet<usize> = graph.nodes.iter().map(|n| n.body_index).collect();
    let mut body: Vec<Atom> = visit_order.iter().map(|n| state.finals[n].clone()).collect();
    for (i, atom) in rule.positive_atoms() {
        if !node_set.contains(&i) {
            body.push(atom.clone());
        }
    }
    for (_, atom) in rule.negated_atoms() {
        body.push(atom.clone());
    }

    let reduced_rule = Rule {
        id: rule.id,
        head: rule.head.clone(),
        aggregate: rule.aggregate.clone(),
        body,
        constraints: rule.constraints.clone(),
    };

    Ok(SipRewrite {
        aux_rules: state.aux_rules,
        aux_relations: state.aux_relations,
        reduced_rule,
    })
}

enum Pass {
    Forward,
    Backward,
}

struct Rewrite<'a> {
    rule: &'a Rule,
    /// Current name and terms per join node; starts as the original atom.
    finals: BTreeMap<usize, Atom>,
    fresh: usize,
    aux_rules: Vec<Rule>,
    aux_relations: Vec<(String, usize)>,
}

impl Rewrite<'_> {
    /// Emit one auxiliary rule filtering `node` by `reducers`, and make
    /// the auxiliary relation the node's new final form.
    fn emit(&mut self, node: usize, reducers: &[usize], pass: Pass) {
        let base = self.freshened(node);
        let keep: BTreeSet<&str> = base.terms.iter().filter_map(Term::as_var).collect();

        let reducer_atoms: Vec<Atom> =
            reducers.iter().map(|r| project(&self.finals[r], &keep)).collect();
        // The base atom carries its full terms; forward passes scan the
        // reducers first, backward passes lead with the base.
        let (body, suffix) = match pass {
            Pass::Forward => {
                let mut body = reducer_atoms;
                body.push(base.clone());
                (body, 1)
            }
            Pass::Backward => {
                let mut body = vec![base.clone()];
                body.extend(reducer_atoms);
                (body, 2)
            }
        };

        let name = format!("__sip_{}_{}_{}", self.rule.id, node, suffix);
        let head = Atom::positive(name.clone(), base.terms.clone());
        self.aux_relations.push((name.clone(), base.terms.len()));
        self.aux_rules.push(Rule {
            id: self.rule.id,
            head,
            aggregate: None,
            body,
            constraints: Vec::new(),
        });
        self.finals.insert(node, Atom::positive(name, base.terms));
    }

    /// Final form of a node with placeholders replaced by fresh variables,
    /// so they can appear in an auxiliary head.
    fn freshened(&mut self, node: usize) -> Atom {
        let mut atom = self.finals[&node].clone();
        for term in &mut atom.terms {
            if matches!(term, Term::Placeholder) {
                *term = Term::Variable(format!("__ph{}", self.fresh));
                self.fresh += 1;
            }
        }
        self.finals.insert(node, atom.clone());
        atom
    }
}

/// Reducer occurrence: keep the variables shared with the base atom,
/// blank the rest, keep constants.
fn project(reducer: &Atom, keep: &BTreeSet<&str>) -> Atom {
    let terms = reducer
        .terms
        .iter()
        .map(|t| match t {
            Term::Variable(v) if !keep.contains(v.as_str()) => Term::Placeholder,
            other => other.clone(),
        })
        .collect();
    Atom::positive(reducer.relation.clone(), terms)
}

/// Apply the rewrite across a program. Reduced rules replace the
/// originals in place; auxiliary rules and relations are appended.
/// Returns the new program and the ids of the rules that were rewritten.
pub fn rewrite_program(
    program: &Program,
    strat: &Stratification,
    mode: SipMode,
) -> (Program, Vec<usize>) {
    let mut out = program.clone();
    let mut rewritten = Vec::new();
    if matches!(mode, SipMode::Off) {
        return (out, rewritten);
    }

    let mut aux_rules = Vec::new();
    for (idx, rule) in program.rules.iter().enumerate() {
        let catalog = build_rule_catalog(rule);
        let graph = JoinGraph::build(&catalog);
        let wanted = match mode {
            SipMode::Auto => strat.is_recursive_rule(idx) && graph.nodes.len() >= 3,
            SipMode::ForceOn => graph.nodes.len() >= 2,
            SipMode::Off => false,
        };
        if !wanted {
            continue;
        }
        let order = default_visit_order(&graph);
        let rewrite = sip_rewrite(rule, &graph, &order).expect("gated on node count");
        out.rules[idx] = rewrite.reduced_rule;
        for (name, arity) in rewrite.aux_relations {
            debug_assert!(!out.relations.contains_key(&name));
            out.relations.insert(
                name,
                RelationInfo {
                    arity,
                    kind: RelationKind::Idb,
                    params: (0..arity).map(|i| format!("c{i}")).collect(),
                    is_input: false,
                    aggregate: None,
                },
            );
        }
        aux_rules.extend(rewrite.aux_rules);
        rewritten.push(rule.id);
    }

    for mut rule in aux_rules {
        rule.id = out.rules.len();
        out.rules.push(rule);
    }
    (out, rewritten)
}
