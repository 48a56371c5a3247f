//! Lower one rule's selected join tree to the operator IR.
//!
//! The walk mirrors the cost model step for step: scan each tree node,
//! apply its semijoin filters, join child results in ascending body order,
//! and after every step fire whatever constraints and antijoins have all
//! their variables bound, then project down to the still-needed columns.
//! Emission is deliberately fine-grained; fusion collapses the chains.

use std::collections::{BTreeMap, BTreeSet};

use crate::frontend::{AggExpr, CmpOp, Program, RelationKind, Rule, RuleCatalog, Term};
use crate::optimizer::RootedJst;

use super::ir::{FilterCond, PlanNode, ProjSource, Role};

/// Lower one variant of a rule. `delta_at` is the body occurrence whose
/// scan reads the delta instead of the full relation.
pub fn translate_rule(
    program: &Program,
    rule: &Rule,
    catalog: &RuleCatalog,
    jst: &RootedJst,
    delta_at: Option<usize>,
) -> PlanNode {
    let ctx = Ctx {
        program,
        rule,
        catalog,
        delta_at,
        var_rank: catalog
            .var_order
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect(),
    };

    let mut acc: Option<Res> = None;
    for &root in &jst.roots {
        let res = ctx.eval(jst, root);
        acc = Some(match acc {
            None => res,
            Some(a) => ctx.settle(ctx.join(a, res, &[])),
        });
    }
    let res = acc.expect("safe rules have at least one join node");
    ctx.project_head(res)
}

/// An intermediate result: the plan so far plus the variable layout of
/// its output and which obligations it has already discharged.
struct Res {
    plan: PlanNode,
    key: Vec<String>,
    val: Vec<String>,
    coverage: BTreeSet<usize>,
    filters: BTreeSet<usize>,
    antijoins: BTreeSet<usize>,
}

impl Res {
    fn layout(&self) -> Vec<String> {
        self.key.iter().chain(&self.val).cloned().collect()
    }

    fn vars(&self) -> BTreeSet<String> {
        self.layout().into_iter().collect()
    }

    fn col(&self, var: &str) -> usize {
        self.key
            .iter()
            .chain(&self.val)
            .position(|v| v == var)
            .expect("variable is present in the layout")
    }
}

struct Ctx<'a> {
    program: &'a Program,
    rule: &'a Rule,
    catalog: &'a RuleCatalog,
    delta_at: Option<usize>,
    var_rank: BTreeMap<&'a str, usize>,
}

impl Ctx<'_> {
    fn role(&self, body_index: usize) -> Role {
        if self.delta_at == Some(body_index) {
            return Role::Delta;
        }
        let relation = &self.rule.body[body_index].relation;
        match self.program.relation(relation).kind {
            RelationKind::Edb => Role::Edb,
            RelationKind::Idb => Role::Full,
        }
    }

    /// Distinct variables sorted by first occurrence in the rule body: the
    /// shared convention that keeps both sides of a join key in the same
    /// column order.
    fn ranked(&self, vars: impl IntoIterator<Item = String>) -> Vec<String> {
        let mut out: Vec<String> = vars.into_iter().collect();
        out.sort_by_key(|v| self.var_rank[v.as_str()]);
        out.dedup();
        out
    }

    /// Scan a body atom: constants and repeated variables become filters,
    /// the value block is its distinct variables in term order.
    fn atom_scan(&self, body_index: usize) -> (PlanNode, Vec<String>) {
        let atom = &self.rule.body[body_index];
        let plan = PlanNode::Scan {
            relation: atom.relation.clone(),
            role: self.role(body_index),
            arity: atom.terms.len(),
        };

        let mut filters = Vec::new();
        let mut first: BTreeMap<&str, usize> = BTreeMap::new();
        let mut val = Vec::new();
        let mut vars = Vec::new();
        for (i, term) in atom.terms.iter().enumerate() {
            match term {
                Term::Variable(v) => {
                    if let Some(&j) = first.get(v.as_str()) {
                        filters.push(FilterCond::CompareCols(j, CmpOp::Eq, i));
                    } else {
                        first.insert(v, i);
                        val.push(ProjSource::Col(i));
                        vars.push(v.clone());
                    }
                }
                Term::Constant(c) => filters.push(FilterCond::CompareConst(i, CmpOp::Eq, *c)),
                Term::Placeholder => {}
            }
        }

        if filters.is_empty() && val.len() == atom.terms.len() {
            return (plan, vars); // every column is a fresh variable
        }
        (PlanNode::FlatMap { input: Box::new(plan), filters, key: Vec::new(), val }, vars)
    }

    /// Scan an atom and key it by `key_vars`, dropping everything else:
    /// the shape of semijoin and antijoin right-hand sides.
    fn keyed_source(&self, body_index: usize, key_vars: &[String]) -> PlanNode {
        let (plan, vars) = self.atom_scan(body_index);
        let key = key_vars
            .iter()
            .map(|k| ProjSource::Col(vars.iter().position(|v| v == k).expect("key var bound")))
            .collect();
        PlanNode::FlatMap { input: Box::new(plan), filters: Vec::new(), key, val: Vec::new() }
    }

    /// Re-key a result so its key block is exactly `key_vars`.
    fn rekey(&self, res: Res, key_vars: &[String]) -> Res {
        if res.key == key_vars {
            return res;
        }
        let key = key_vars.iter().map(|v| ProjSource::Col(res.col(v))).collect();
        let val_vars: Vec<String> = res
            .layout()
            .into_iter()
            .filter(|v| !key_vars.contains(v))
            .collect();
        let val = val_vars.iter().map(|v| ProjSource::Col(res.col(v))).collect();
        Res {
            plan: PlanNode::FlatMap { input: Box::new(res.plan), filters: Vec::new(), key, val },
            key: key_vars.to_vec(),
            val: val_vars,
            coverage: res.coverage,
            filters: res.filters,
            antijoins: res.antijoins,
        }
    }

    /// Join two results on `key_vars` (empty for a cross product).
    fn join(&self, left: Res, right: Res, key_vars: &[String]) -> Res {
        let left = self.rekey(left, key_vars);
        let right = self.rekey(right, key_vars);
        let mut coverage = left.coverage;
        coverage.extend(right.coverage.iter().copied());
        let mut filters = left.filters;
        filters.extend(right.filters.iter().copied());
        let mut antijoins = left.antijoins;
        antijoins.extend(right.antijoins.iter().copied());
        let mut val = left.val.clone();
        val.extend(right.val.iter().cloned());
        Res {
            plan: PlanNode::Join {
                left: Box::new(left.plan),
                right: Box::new(right.plan),
                key_len: key_vars.len(),
            },
            key: key_vars.to_vec(),
            val,
            coverage,
            filters,
            antijoins,
        }
    }

    /// Variables still needed downstream of a result, given what it has
    /// already covered and applied.
    fn live(&self, res: &Res) -> BTreeSet<String> {
        let mut live: BTreeSet<String> = self.catalog.head_needs.clone();
        for node in &self.catalog.nodes {
            if !res.coverage.contains(&node.body_index) {
                live.extend(node.vars.iter().cloned());
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

    /// Filter (optionally) and project a result down to `keep`, clearing
    /// its key block.
    fn project(&self, res: Res, filters: Vec<FilterCond>, keep: &BTreeSet<String>) -> Res {
        let val_vars: Vec<String> =
            res.layout().into_iter().filter(|v| keep.contains(v)).collect();
        let val = val_vars.iter().map(|v| ProjSource::Col(res.col(v))).collect();
        Res {
            plan: PlanNode::FlatMap {
                input: Box::new(res.plan),
                filters,
                key: Vec::new(),
                val,
            },
            key: Vec::new(),
            val: val_vars,
            coverage: res.coverage,
            filters: res.filters,
            antijoins: res.antijoins,
        }
    }

    /// Fire every constraint and antijoin whose variables are now bound,
    /// then project the result down to the still-needed columns.
    fn settle(&self, mut res: Res) -> Res {
        let bound = res.vars();
        let fired_filters: Vec<usize> = self
            .rule
            .constraints
            .iter()
            .enumerate()
            .filter(|(i, c)| {
                !res.filters.contains(i) && c.variables().iter().all(|v| bound.contains(*v))
            })
            .map(|(i, _)| i)
            .collect();
        res.filters.extend(fired_filters.iter().copied());

        let fired_antijoins: Vec<usize> = self
            .catalog
            .antijoins
            .iter()
            .filter(|a| {
                !res.antijoins.contains(&a.body_index)
                    && a.vars.iter().all(|v| bound.contains(v))
            })
            .map(|a| a.body_index)
            .collect();
        res.antijoins.extend(fired_antijoins.iter().copied());

        let live = self.live(&res);
        let mut needed = live.clone();
        for a in &self.catalog.antijoins {
            if fired_antijoins.contains(&a.body_index) {
                needed.extend(a.vars.iter().cloned());
            }
        }

        let filters: Vec<FilterCond> =
            fired_filters.iter().map(|&i| self.filter_cond(&res, i)).collect();
        if !filters.is_empty() || !bound.iter().all(|v| needed.contains(v)) {
            res = self.project(res, filters, &needed);
        }

        for a in &self.catalog.antijoins {
            if !fired_antijoins.contains(&a.body_index) {
                continue;
            }
            let key_vars = self.ranked(a.vars.iter().cloned());
            res = self.rekey(res, &key_vars);
            let right = self.keyed_source(a.body_index, &key_vars);
            res.plan = PlanNode::Antijoin {
                left: Box::new(res.plan),
                right: Box::new(right),
                key_len: key_vars.len(),
            };
        }
        if !fired_antijoins.is_empty() && !res.vars().iter().all(|v| live.contains(v)) {
            res = self.project(res, Vec::new(), &live);
        }
        res
    }

    /// A constraint rendered over a result's current layout.
    fn filter_cond(&self, res: &Res, constraint: usize) -> FilterCond {
        let c = &self.rule.constraints[constraint];
        match (&c.left, &c.right) {
            (Term::Variable(l), Term::Variable(r)) => {
                FilterCond::CompareCols(res.col(l), c.op, res.col(r))
            }
            (Term::Variable(l), Term::Constant(k)) => {
                FilterCond::CompareConst(res.col(l), c.op, *k)
            }
            (Term::Constant(k), Term::Variable(r)) => {
                FilterCond::CompareConst(res.col(r), c.op.flipped(), *k)
            }
            _ => unreachable!("parser rejects variable-free constraints"),
        }
    }

    /// Evaluate the subtree rooted at a join-tree node.
    fn eval(&self, jst: &RootedJst, node: usize) -> Res {
        let (plan, vars) = self.atom_scan(node);
        let mut res = Res {
            plan,
            key: Vec::new(),
            val: vars,
            coverage: [node].into(),
            filters: BTreeSet::new(),
            antijoins: BTreeSet::new(),
        };

        for semi in self.catalog.semijoins_on(node) {
            let key_vars = self.ranked(semi.vars.iter().cloned());
            res = self.rekey(res, &key_vars);
            let right = self.keyed_source(semi.body_index, &key_vars);
            res.plan = PlanNode::Join {
                left: Box::new(res.plan),
                right: Box::new(right),
                key_len: key_vars.len(),
            };
        }
        res = self.settle(res);

        for child in jst.children(node) {
            let cres = self.eval(jst, child);
            let shared: Vec<String> =
                res.vars().intersection(&cres.vars()).cloned().collect();
            debug_assert!(!shared.is_empty(), "tree edges share a variable");
            let key_vars = self.ranked(shared);
            res = self.settle(self.join(res, cres, &key_vars));
        }
        res
    }

    /// Final projection to the head layout: head terms in order, then the
    /// aggregate argument as the last column.
    fn project_head(&self, res: Res) -> PlanNode {
        let mut val: Vec<ProjSource> = self
            .rule
            .head
            .terms
            .iter()
            .map(|t| match t {
                Term::Variable(v) => ProjSource::Col(res.col(v)),
                Term::Constant(c) => ProjSource::Const(*c),
                Term::Placeholder => unreachable!("parser rejects head placeholders"),
            })
            .collect();
        if let Some(agg) = &self.rule.aggregate {
            val.push(match &agg.over {
                AggExpr::Var(v) => ProjSource::Col(res.col(v)),
                AggExpr::Const(c) => ProjSource::Const(*c),
                AggExpr::AddVar(a, b) => ProjSource::AddCols(res.col(a), res.col(b)),
                AggExpr::AddConst(v, c) => ProjSource::AddConst(res.col(v), *c),
            });
        }

        let width = res.key.len() + res.val.len();
        let identity = res.key.is_empty()
            && val.len() == width
            && val.iter().enumerate().all(|(i, s)| *s == ProjSource::Col(i));
        if identity {
            return res.plan;
        }
        PlanNode::FlatMap { input: Box::new(res.plan), filters: Vec::new(), key: Vec::new(), val }
    }
}
