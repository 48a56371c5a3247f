//! Rooted join spanning trees: enumeration over maximum-weight spanning
//! trees, a structural cost model counting distinct live variables per
//! step, and plan selection with a listing-order fallback.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::frontend::{Rule, RuleCatalog};

use super::join_graph::JoinGraph;

/// Candidate plan: a spanning tree (forest, when the join graph is
/// disconnected) with an execution root per component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedJst {
    /// One root per component; the primary (largest) component first.
    pub roots: Vec<usize>,
    /// Child body index -> parent body index; roots are absent.
    pub parent: BTreeMap<usize, usize>,
    /// Execution order: each component's subtree post-order, components in
    /// `roots` order.
    pub post_order: Vec<usize>,
    /// Tree edges, (small, large) and ascending; the forest's identity.
    pub edges: Vec<(usize, usize)>,
}

impl RootedJst {
    /// Assemble from oriented roots and a parent map.
    pub fn new(roots: Vec<usize>, parent: BTreeMap<usize, usize>) -> RootedJst {
        let mut edges: Vec<(usize, usize)> = parent
            .iter()
            .map(|(&c, &p)| (c.min(p), c.max(p)))
            .collect();
        edges.sort_unstable();

        let mut post_order = Vec::new();
        for &root in &roots {
            push_post_order(root, &parent, &mut post_order);
        }
        RootedJst { roots, parent, post_order, edges }
    }

    /// Root of the primary component.
    pub fn root(&self) -> usize {
        self.roots[0]
    }

    /// Children of a node, ascending: also their join order.
    pub fn children(&self, node: usize) -> Vec<usize> {
        self.parent.iter().filter(|&(_, &p)| p == node).map(|(&c, _)| c).collect()
    }

    /// Longest root-to-leaf edge count across the forest.
    pub fn depth(&self) -> usize {
        self.post_order
            .iter()
            .map(|&n| {
                let mut d = 0;
                let mut cur = n;
                while let Some(&p) = self.parent.get(&cur) {
                    d += 1;
                    cur = p;
                }
                d
            })
            .max()
            .unwrap_or(0)
    }

    /// Total order key: sorted edge list, then roots.
    pub fn encoding(&self) -> (Vec<(usize, usize)>, Vec<usize>) {
        (self.edges.clone(), self.roots.clone())
    }
}

fn push_post_order(node: usize, parent: &BTreeMap<usize, usize>, out: &mut Vec<usize>) {
    let children: Vec<usize> =
        parent.iter().filter(|&(_, &p)| p == node).map(|(&c, _)| c).collect();
    for c in children {
        push_post_order(c, parent, out);
    }
    out.push(node);
}

/// Too many (tree, root) candidates to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchSpaceExceeded {
    pub pairs: usize,
    pub cap: usize,
}

impl fmt::Display for SearchSpaceExceeded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "search space exceeded: over {} candidate plans (cap {})", self.pairs, self.cap)
    }
}

impl std::error::Error for SearchSpaceExceeded {}

pub const DEFAULT_CANDIDATE_CAP: usize = 10_000;

/// All maximum-weight spanning forests of the join graph, rooted every
/// possible way; sorted by (edge list, roots).
pub fn enumerate_rooted_jsts(
    graph: &JoinGraph,
    cap: usize,
) -> Result<Vec<RootedJst>, SearchSpaceExceeded> {
    let comps = graph.components();
    let mut per_comp: Vec<Vec<Vec<(usize, usize)>>> = Vec::new();
    for comp in &comps {
        per_comp.push(max_spanning_trees(graph, comp, cap)?);
    }

    let mut pairs: usize = 1;
    for (comp, trees) in comps.iter().zip(&per_comp) {
        pairs = pairs.saturating_mul(trees.len().saturating_mul(comp.len()));
        if pairs > cap {
            return Err(SearchSpaceExceeded { pairs, cap });
        }
    }

    // Cartesian product of per-component (tree, root) choices.
    let mut candidates = vec![(Vec::new(), Vec::new())]; // (edges, roots)
    for (comp, trees) in comps.iter().zip(&per_comp) {
        let mut next = Vec::new();
        for (edges, roots) in &candidates {
            for tree in trees {
                for &root in comp {
                    let mut edges = edges.clone();
                    edges.extend(tree.iter().copied());
                    let mut roots = roots.clone();
                    roots.push(root);
                    next.push((edges, roots));
                }
            }
        }
        candidates = next;
    }

    let mut out: Vec<RootedJst> = candidates
        .into_iter()
        .map(|(edges, roots)| orient(&edges, &roots))
        .collect();
    out.sort_by_key(RootedJst::encoding);
    Ok(out)
}

/// Orient undirected tree edges away from each component's root.
fn orient(edges: &[(usize, usize)], roots: &[usize]) -> RootedJst {
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(a, b) in edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let mut parent = BTreeMap::new();
    let mut seen: BTreeSet<usize> = roots.iter().copied().collect();
    let mut frontier: Vec<usize> = roots.to_vec();
    while let Some(n) = frontier.pop() {
        for &next in adj.get(&n).into_iter().flatten() {
            if seen.insert(next) {
                parent.insert(next, n);
                frontier.push(next);
            }
        }
    }
    RootedJst::new(roots.to_vec(), parent)
}

/// All spanning trees of one component whose total weight is maximum,
/// via include/exclude branching over descending-weight edges with an
/// optimistic-bound prune.
fn max_spanning_trees(
    graph: &JoinGraph,
    comp: &[usize],
    cap: usize,
) -> Result<Vec<Vec<(usize, usize)>>, SearchSpaceExceeded> {
    if comp.len() == 1 {
        return Ok(vec![Vec::new()]);
    }
    let index: BTreeMap<usize, usize> = comp.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let mut edges: Vec<(usize, usize, usize)> = graph
        .edges
        .iter()
        .filter(|e| index.contains_key(&e.a) && index.contains_key(&e.b))
        .map(|e| (e.weight, e.a, e.b))
        .collect();
    edges.sort_by_key(|&(w, a, b)| (std::cmp::Reverse(w), a, b));

    let target = kruskal_weight(&edges, &index);
    let need = comp.len() - 1;

    struct Walk<'a> {
        edges: &'a [(usize, usize, usize)],
        index: &'a BTreeMap<usize, usize>,
        need: usize,
        target: usize,
        cap: usize,
        found: Vec<Vec<(usize, usize)>>,
        exceeded: bool,
    }
    impl Walk<'_> {
        fn go(&mut self, at: usize, chosen: &mut Vec<(usize, usize)>, weight: usize, dsu: &Dsu) {
            if self.exceeded {
                return;
            }
            if chosen.len() == self.need {
                if weight == self.target {
                    let mut tree = chosen.clone();
                    tree.sort_unstable();
                    self.found.push(tree);
                    if self.found.len() > self.cap {
                        self.exceeded = true;
                    }
                }
                return;
            }
            if at == self.edges.len() {
                return;
            }
            let optimistic: usize = self.edges[at..]
                .iter()
                .take(self.need - chosen.len())
                .map(|&(w, _, _)| w)
                .sum();
            if weight + optimistic < self.target
                || self.edges.len() - at < self.need - chosen.len()
            {
                return;
            }
            let (w, a, b) = self.edges[at];
            let (ra, rb) = (dsu.find(self.index[&a]), dsu.find(self.index[&b]));
            if ra != rb {
                let mut joined = dsu.clone();
                joined.union(ra, rb);
                chosen.push((a.min(b), a.max(b)));
                self.go(at + 1, chosen, weight + w, &joined);
                chosen.pop();
            }
            self.go(at + 1, chosen, weight, dsu);
        }
    }

    let mut walk = Walk {
        edges: &edges,
        index: &index,
        need,
        target,
        cap,
        found: Vec::new(),
        exceeded: false,
    };
    walk.go(0, &mut Vec::new(), 0, &Dsu::new(comp.len()));
    if walk.exceeded {
        return Err(SearchSpaceExceeded { pairs: walk.found.len(), cap });
    }
    Ok(walk.found)
}

fn kruskal_weight(edges: &[(usize, usize, usize)], index: &BTreeMap<usize, usize>) -> usize {
    let mut dsu = Dsu::new(index.len());
    let mut total = 0;
    for &(w, a, b) in edges {
        let (ra, rb) = (dsu.find(index[&a]), dsu.find(index[&b]));
        if ra != rb {
            dsu.union(ra, rb);
            total += w;
        }
    }
    total
}

#[derive(Clone)]
struct Dsu {
    parent: std::cell::RefCell<Vec<usize>>,
}

impl Dsu {
    fn new(n: usize) -> Dsu {
        Dsu { parent: std::cell::RefCell::new((0..n).collect()) }
    }

    fn find(&self, mut x: usize) -> usize {
        let mut parent = self.parent.borrow_mut();
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.parent.borrow_mut()[ra] = rb;
    }
}

/// Structural cost of a candidate: distinct live variables at every scan,
/// join, and cross-product step, before projection; total is the maximum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanCost {
    pub per_step: Vec<(String, usize)>,
    pub total: usize,
}

/// Evaluate the cost model on a candidate plan.
///
/// Mirrors translation exactly: each node scans its atom, then joins the
/// child subtree results in ascending order; a variable stays live while
/// some atom outside the intermediate result, the head, the aggregate
/// argument, or an unapplied constraint or negated atom still needs it.
pub fn plan_cost(t: &RootedJst, rule: &Rule, catalog: &RuleCatalog) -> PlanCost {
    let vars_of: BTreeMap<usize, BTreeSet<String>> = catalog
        .nodes
        .iter()
        .map(|n| (n.body_index, n.vars.iter().cloned().collect()))
        .collect();

    struct Res {
        vars: BTreeSet<String>,
        coverage: BTreeSet<usize>,
        filters: BTreeSet<usize>,
        antijoins: BTreeSet<usize>,
    }

    struct Walk<'a> {
        rule: &'a Rule,
        catalog: &'a RuleCatalog,
        vars_of: &'a BTreeMap<usize, BTreeSet<String>>,
        t: &'a RootedJst,
        steps: Vec<(String, usize)>,
    }
    impl Walk<'_> {
        fn live(&self, res: &Res) -> BTreeSet<String> {
            let mut live = self.catalog.head_needs.clone();
            for (n, vars) in self.vars_of {
                if !res.coverage.contains(n) {
                    live.extend(vars.iter().cloned());
                }
            }
            for (i, c) in self.rule.constraints.iter().enumerate() {
                if !res.filters.contains(&i) {
                    live.extend(c.variables().iter().map(|v| v.to_string()));
                }
            }
            for a in &self.catalog.antijoins {
                if !res.antijoins.contains(&a.body_index) {
                    live.extend(a.vars.iter().cloned());
                }
            }
            live
        }

        /// Mark filters and antijoins that can fire on `res`, then project.
        fn settle(&self, res: &mut Res) {
            for (i, c) in self.rule.constraints.iter().enumerate() {
                if c.variables().iter().all(|v| res.vars.contains(*v)) {
                    res.filters.insert(i);
                }
            }
            for a in &self.catalog.antijoins {
                if a.vars.iter().all(|v| res.vars.contains(v)) {
                    res.antijoins.insert(a.body_index);
                }
            }
            let live = self.live(res);
            res.vars.retain(|v| live.contains(v));
        }

        fn eval(&mut self, node: usize) -> Res {
            let children = self.t.children(node);
            let child_results: Vec<Res> = children.iter().map(|&c| self.eval(c)).collect();

            let atom = &self.rule.body[node];
            let vars = self.vars_of[&node].clone();
            self.steps.push((format!("scan {}[{}]", atom.relation, node), vars.len()));
            let mut res = Res {
                vars,
                coverage: [node].into(),
                filters: BTreeSet::new(),
                antijoins: BTreeSet::new(),
            };
            self.settle(&mut res);

            for (child, cres) in children.iter().zip(child_results) {
                let union: BTreeSet<String> = res.vars.union(&cres.vars).cloned().collect();
                self.steps.push((
                    format!("join [{node}] with subtree [{child}]"),
                    union.len(),
                ));
                res.vars = union;
                res.coverage.extend(cres.coverage);
                res.filters.extend(cres.filters);
                res.antijoins.extend(cres.antijoins);
                self.settle(&mut res);
            }
            res
        }
    }

    let mut walk = Walk { rule, catalog, vars_of: &vars_of, t, steps: Vec::new() };
    let mut acc: Option<Res> = None;
    for &root in &t.roots {
        let res = walk.eval(root);
        acc = Some(match acc {
            None => res,
            Some(mut a) => {
                let union: BTreeSet<String> = a.vars.union(&res.vars).cloned().collect();
                walk.steps.push((format!("cross with component [{root}]"), union.len()));
                a.vars = union;
                a.coverage.extend(res.coverage);
                a.filters.extend(res.filters);
                a.antijoins.extend(res.antijoins);
                walk.settle(&mut a);
                a
            }
        });
    }

    let total = walk.steps.iter().map(|&(_, n)| n).max().unwrap_or(0);
    PlanCost { per_step: walk.steps, total }
}

/// The body listing order as a plan: a chain rooted at the last atom, so
/// execution joins atoms left to right exactly as written.
pub fn listing_chain(catalog: &RuleCatalog) -> RootedJst {
    let order: Vec<usize> = catalog.nodes.iter().map(|n| n.body_index).collect();
    let parent: BTreeMap<usize, usize> =
        order.windows(2).map(|w| (w[0], w[1])).collect();
    RootedJst::new(vec![*order.last().expect("safe rules have a node")], parent)
}

/// Why `select_plan` did not return an enumerated winner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fallback {
    SearchSpaceExceeded { pairs: usize },
    ListingCheaper,
}

#[derive(Debug, Clone)]
pub struct SelectedPlan {
    pub jst: RootedJst,
    pub cost: PlanCost,
    /// Every enumerated candidate with its total cost, in candidate order;
    /// empty when enumeration blew the cap.
    pub alternatives: Vec<(RootedJst, usize)>,
    pub fallback: Option<Fallback>,
}

/// Pick the cheapest candidate: minimum total cost, then smallest depth,
/// then smallest encoding. Falls back to the body listing order when the
/// search space blows the cap or when the listing order is strictly
/// cheaper, so selection never loses to the hand-written order.
pub fn select_plan(rule: &Rule, catalog: &RuleCatalog) -> SelectedPlan {
    select_plan_with_cap(rule, catalog, DEFAULT_CANDIDATE_CAP)
}

pub fn select_plan_with_cap(rule: &Rule, catalog: &RuleCatalog, cap: usize) -> SelectedPlan {
    let graph = JoinGraph::build(catalog);
    let listing = listing_chain(catalog);
    let listing_cost = plan_cost(&listing, rule, catalog);

    let candidates = match enumerate_rooted_jsts(&graph, cap) {
        Ok(c) => c,
        Err(e) => {
            return SelectedPlan {
                jst: listing,
                cost: listing_cost,
                alternatives: Vec::new(),
                fallback: Some(Fallback::SearchSpaceExceeded { pairs: e.pairs }),
            }
        }
    };

    let costed: Vec<(RootedJst, PlanCost)> = candidates
        .into_iter()
        .map(|c| {
            let cost = plan_cost(&c, rule, catalog);
            (c, cost)
        })
        .collect();
    let (best, best_cost) = costed
        .iter()
        .min_by_key(|(c, cost)| (cost.total, c.depth(), c.encoding()))
        .map(|(c, cost)| (c.clone(), cost.clone()))
        .expect("non-empty graphs enumerate at least one candidate");
    let alternatives: Vec<(RootedJst, usize)> =
        costed.into_iter().map(|(c, cost)| (c, cost.total)).collect();

    if listing_cost.total < best_cost.total {
        SelectedPlan {
            jst: listing,
            cost: listing_cost,
            alternatives,
            fallback: Some(Fallback::ListingCheaper),
        }
    } else {
        SelectedPlan { jst: best, cost: best_cost, alternatives, fallback: None }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{build_rule_catalog, parse_program, Program};

    fn prepared(src: &str, rule: usize) -> (Program, RuleCatalog) {
        let program = parse_program(src).expect("test program parses");
        let catalog = build_rule_catalog(&program.rules[rule]);
        (program, catalog)
    }

    const EVEN_HOP: &str = "\
        .decl edge(a: number, b: number)\n\
        .decl reach(a: number)\n\
        reach(x) :- edge(x, y), edge(y, z), reach(z).";

    #[test]
    fn even_hop_rule_has_three_candidates_with_known_costs() {
        let (program, catalog) = prepared(EVEN_HOP, 0);
        let rule = &program.rules[0];
        let graph = JoinGraph::build(&catalog);
        let cands = enumerate_rooted_jsts(&graph, DEFAULT_CANDIDATE_CAP).unwrap();
        assert_eq!(cands.len(), 3);

        let total_for = |root: usize| {
            let c = cands.iter().find(|c| c.root() == root).expect("root candidate");
            plan_cost(c, rule, &catalog).total
        };
        assert_eq!(total_for(0), 2); // rooted at edge(x, y)
        assert_eq!(total_for(1), 3); // rooted at edge(y, z)
        assert_eq!(total_for(2), 3); // rooted at reach(z)
    }

    #[test]
    fn even_hop_selection_takes_the_cost_two_root() {
        let (program, catalog) = prepared(EVEN_HOP, 0);
        let plan = select_plan(&program.rules[0], &catalog);
        assert_eq!(plan.cost.total, 2);
        assert_eq!(plan.jst.root(), 0);
        assert!(plan.fallback.is_none());
        assert_eq!(plan.alternatives.len(), 3);
    }

    const TRIPLE_JOIN: &str = "\
        .decl p(a: number, b: number)\n\
        .decl q(a: number, b: number, c: number)\n\
        .decl u(a: number, b: number, c: number)\n\
        p(x, z) :- p(y, w), u(w, r, z), q(x, r, y).";

    /// Independent check: cost every left-deep order of three atoms by the
    /// same distinct-live-variable rule, computed directly.
    fn left_deep_costs(program: &Program, rule: usize) -> BTreeMap<[usize; 3], usize> {
        let rule = &program.rules[rule];
        let vars = |i: usize| -> BTreeSet<&str> {
            rule.body[i].terms.iter().filter_map(|t| t.as_var()).collect()
        };
        let head: BTreeSet<&str> =
            rule.head.terms.iter().filter_map(|t| t.as_var()).collect();
        let mut out = BTreeMap::new();
        for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            let [a, b, c] = perm;
            let first: BTreeSet<&str> = vars(a).union(&vars(b)).copied().collect();
            let live: BTreeSet<&str> = head.union(&vars(c)).copied().collect();
            let kept: BTreeSet<&str> = first.intersection(&live).copied().collect();
            let second: BTreeSet<&str> = kept.union(&vars(c)).copied().collect();
            let total = [vars(a).len(), vars(b).len(), vars(c).len(), first.len(), second.len()]
                .into_iter()
                .max()
                .unwrap();
            out.insert(perm, total);
        }
        out
    }

    #[test]
    fn triangle_selection_matches_exhaustive_minimum_and_avoids_the_bad_first_join() {
        let (program, catalog) = prepared(TRIPLE_JOIN, 0);
        let rule = &program.rules[0];
        let graph = JoinGraph::build(&catalog);
        let cands = enumerate_rooted_jsts(&graph, DEFAULT_CANDIDATE_CAP).unwrap();
        assert_eq!(cands.len(), 9); // 3 spanning trees of a triangle x 3 roots

        let brute = left_deep_costs(&program, 0);
        let brute_min = *brute.values().min().unwrap();
        assert_eq!(brute_min, 4);
        assert_eq!(brute[&[1, 2, 0]], 5); // u and q joined first
        assert_eq!(brute[&[2, 1, 0]], 5);

        let plan = select_plan(rule, &catalog);
        assert_eq!(plan.cost.total, brute_min);

        // The first join executed must not be u with q (bodies 1 and 2).
        let first_internal = plan
            .jst
            .post_order
            .iter()
            .copied()
            .find(|&n| !plan.jst.children(n).is_empty())
            .unwrap();
        let first_child = plan.jst.children(first_internal)[0];
        let first_pair: BTreeSet<usize> = [first_internal, first_child].into();
        assert_ne!(first_pair, [1, 2].into());

        // Equal-cost, depth-1 stars exist at every node; the encoding
        // tie-break settles on the star rooted at the first atom.
        assert_eq!(plan.jst.root(), 0);
        assert_eq!(plan.jst.depth(), 1);
    }

    #[test]
    fn single_atom_rule_costs_its_distinct_variables() {
        let (program, catalog) = prepared(
            ".decl edge(a: number, b: number)\n\
             .decl loop(a: number)\n\
             loop(x) :- edge(x, x).",
            0,
        );
        let plan = select_plan(&program.rules[0], &catalog);
        assert_eq!(plan.cost.total, 1);
        assert_eq!(plan.jst.post_order, [0]);
    }

    #[test]
    fn costs_are_stable_under_variable_renaming() {
        let renamed = EVEN_HOP.replace("x", "alpha").replace("y", "beta").replace("z", "gamma");
        let (p1, c1) = prepared(EVEN_HOP, 0);
        let (p2, c2) = prepared(&renamed, 0);
        let graph = JoinGraph::build(&c1);
        for cand in enumerate_rooted_jsts(&graph, DEFAULT_CANDIDATE_CAP).unwrap() {
            let a = plan_cost(&cand, &p1.rules[0], &c1);
            let b = plan_cost(&cand, &p2.rules[0], &c2);
            assert_eq!(a.total, b.total);
        }
    }

    #[test]
    fn disconnected_bodies_cross_product_after_each_component() {
        let (program, catalog) = prepared(
            ".decl a(x: number)\n\
             .decl b(x: number, y: number)\n\
             .decl cross(x: number, y: number, z: number)\n\
             cross(x, u, z) :- a(x), b(u, z).",
            0,
        );
        let plan = select_plan(&program.rules[0], &catalog);
        assert_eq!(plan.jst.roots, [0, 1]); // same-size components order by first atom
        assert_eq!(plan.cost.total, 3); // {x} crossed with {u, z}
        assert!(plan
            .cost
            .per_step
            .iter()
            .any(|(label, n)| label.starts_with("cross") && *n == 3));
    }

    #[test]
    fn dense_same_weight_graphs_blow_the_cap_and_fall_back_to_listing() {
        let (program, catalog) = prepared(
            ".decl r(a: number, b: number)\n\
             .decl big(a: number)\n\
             big(h) :- r(h, y1), r(h, y2), r(h, y3), r(h, y4), r(h, y5), r(h, y6), r(h, y7).",
            0,
        );
        // Complete graph on 7 nodes, all weights 1: 16807 spanning trees.
        let plan = select_plan(&program.rules[0], &catalog);
        assert!(matches!(plan.fallback, Some(Fallback::SearchSpaceExceeded { .. })));
        assert_eq!(plan.jst.root(), 6);
        assert_eq!(plan.jst.parent[&0], 1);
        assert_eq!(plan.jst.post_order, [0, 1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn running_intersection_holds_for_acyclic_rules() {
        let (program, catalog) = prepared(EVEN_HOP, 0);
        let graph = JoinGraph::build(&catalog);
        for cand in enumerate_rooted_jsts(&graph, DEFAULT_CANDIDATE_CAP).unwrap() {
            for var in program.rules[0].positive_var_order() {
                let holders: BTreeSet<usize> = catalog
                    .nodes
                    .iter()
                    .filter(|n| n.vars.contains(&var))
                    .map(|n| n.body_index)
                    .collect();
                // Walk tree edges restricted to holders: they must connect.
                let mut seen: BTreeSet<usize> = [*holders.iter().next().unwrap()].into();
                let mut grew = true;
                while grew {
                    grew = false;
                    for &(a, b) in &cand.edges {
                        if holders.contains(&a) && holders.contains(&b) {
                            if seen.contains(&a) && seen.insert(b) {
                                grew = true;
                            } else if seen.contains(&b) && seen.insert(a) {
                                grew = true;
                            }
                        }
                    }
                }
                assert_eq!(seen, holders, "variable {var} spans a disconnected subtree");
            }
        }
    }
}
