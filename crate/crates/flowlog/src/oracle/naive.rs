//! A deliberately slow reference evaluator: every round re-derives every
//! rule from all known facts with nested-loop joins in body listing order.
//! No deltas, no plans, no sharing; it exists to cross-check the engine.

use std::collections::{BTreeMap, BTreeSet};

use crate::frontend::{
    stratify, AggExpr, AggregateFunc, Atom, DependencyGraph, Program, Rule, Term,
    UnstratifiableProgram,
};

/// Set-semantics relation contents; lattice and counted relations store the
/// group columns followed by the value column.
pub type Relation = BTreeSet<Vec<i64>>;

/// Every relation of a program, keyed by name.
pub type Database = BTreeMap<String, Relation>;

/// Run `program` to fixpoint over `inputs`, returning all relations.
pub fn naive_evaluate(
    program: &Program,
    inputs: &Database,
) -> Result<Database, UnstratifiableProgram> {
    let graph = DependencyGraph::build(program);
    let strat = stratify(program, &graph)?;

    let mut db: Database = program
        .relations
        .keys()
        .map(|name| (name.clone(), Relation::new()))
        .collect();
    for (name, rows) in inputs {
        if let Some(slot) = db.get_mut(name) {
            *slot = rows.clone();
        }
    }

    for stratum in &strat.strata {
        loop {
            let mut changed = false;
            for &rid in stratum {
                let rule = &program.rules[rid];
                let derived = derive(rule, &db);
                changed |= merge(program, rule, derived, &mut db);
            }
            if !changed {
                break;
            }
        }
    }
    Ok(db)
}

/// Fold a rule's derivations into the database; reports whether anything
/// new appeared or any lattice group strictly improved.
fn merge(program: &Program, rule: &Rule, derived: Relation, db: &mut Database) -> bool {
    let info = &program.relations[&rule.head.relation];
    let rel = db.get_mut(&rule.head.relation).expect("head relation exists");
    match info.aggregate {
        None => {
            let before = rel.len();
            rel.extend(derived);
            rel.len() != before
        }
        Some(func) if func.is_lattice() => {
            let mut changed = false;
            for row in derived {
                let (group, value) = split_value(&row);
                let current = rel
                    .iter()
                    .find(|r| split_value(r).0 == group)
                    .map(|r| r.clone());
                match current {
                    Some(old) => {
                        let old_value = split_value(&old).1;
                        let better = match func {
                            AggregateFunc::Min => value < old_value,
                            _ => value > old_value,
                        };
                        if better {
                            rel.remove(&old);
                            rel.insert(row);
                            changed = true;
                        }
                    }
                    None => {
                        rel.insert(row);
                        changed = true;
                    }
                }
            }
            changed
        }
        // COUNT/SUM: single defining rule in its own non-recursive stratum,
        // so a full recompute per round is exact.
        Some(_) => {
            if *rel == derived {
                false
            } else {
                *rel = derived;
                true
            }
        }
    }
}

fn split_value(row: &[i64]) -> (&[i64], i64) {
    let (last, group) = row.split_last().expect("aggregate rows are non-empty");
    (group, *last)
}

/// All head rows a single rule derives from the current database.
fn derive(rule: &Rule, db: &Database) -> Relation {
    let mut search = Search::new(rule, db);
    let mut solutions: BTreeSet<Vec<i64>> = BTreeSet::new();
    search.run(&mut |search| {
        let mut row: Vec<i64> = rule
            .head
            .terms
            .iter()
            .map(|t| search.eval_term(t))
            .collect();
        if let Some(agg) = &rule.aggregate {
            row.push(search.eval_agg(&agg.over));
        }
        solutions.insert(row);
    });

    match &rule.aggregate {
        // Head rows double as distinct (group, value) contributions.
        None => solutions,
        Some(agg) => {
            let mut groups: BTreeMap<Vec<i64>, Vec<i64>> = BTreeMap::new();
            for row in &solutions {
                let (group, value) = split_value(row);
                groups.entry(group.to_vec()).or_default().push(value);
            }
            groups
                .into_iter()
                .map(|(mut group, values)| {
                    let folded = match agg.func {
                        AggregateFunc::Min => *values.iter().min().expect("non-empty group"),
                        AggregateFunc::Max => *values.iter().max().expect("non-empty group"),
                        AggregateFunc::Count => values.len() as i64,
                        AggregateFunc::Sum => values.iter().sum(),
                    };
                    group.push(folded);
                    group
                })
                .collect()
        }
    }
}

/// Backtracking nested-loop search over the rule's positive atoms in body
/// listing order. Constraints and negated atoms fire at the first depth
/// where all their variables are bound.
struct Search<'a> {
    rule: &'a Rule,
    db: &'a Database,
    positives: Vec<&'a Atom>,
    var_index: BTreeMap<&'a str, usize>,
    bindings: Vec<Option<i64>>,
    /// Constraint indexes to check after binding atom `d` (depth d+1).
    constraints_at: Vec<Vec<usize>>,
    /// Negated-atom body indexes to check after binding atom `d`.
    negations_at: Vec<Vec<usize>>,
}

impl<'a> Search<'a> {
    fn new(rule: &'a Rule, db: &'a Database) -> Self {
        let positives: Vec<&Atom> = rule.positive_atoms().map(|(_, a)| a).collect();
        let mut var_index: BTreeMap<&'a str, usize> = BTreeMap::new();
        for atom in &positives {
            for v in atom.terms.iter().filter_map(Term::as_var) {
                let next = var_index.len();
                var_index.entry(v).or_insert(next);
            }
        }

        let bound_after = |depth: usize| -> BTreeSet<&str> {
            positives[..depth]
                .iter()
                .flat_map(|a| a.terms.iter())
                .filter_map(Term::as_var)
                .collect()
        };
        let mut constraints_at = vec![Vec::new(); positives.len()];
        for (ci, c) in rule.constraints.iter().enumerate() {
            let vars = c.variables();
            let depth = (1..=positives.len())
                .find(|&d| vars.iter().all(|v| bound_after(d).contains(v)))
                .expect("safety: constraint variables are positively bound");
            constraints_at[depth - 1].push(ci);
        }
        let mut negations_at = vec![Vec::new(); positives.len()];
        for (bi, atom) in rule.negated_atoms() {
            let vars = atom.variables();
            let depth = (1..=positives.len())
                .find(|&d| vars.iter().all(|v| bound_after(d).contains(v.as_str())))
                .expect("safety: negated variables are positively bound");
            negations_at[depth - 1].push(bi);
        }

        let vars = var_index.len();
        Search {
            rule,
            db,
            positives,
            var_index,
            bindings: vec![None; vars],
            constraints_at,
            negations_at,
        }
    }

    fn run(&mut self, emit: &mut impl FnMut(&Self)) {
        self.descend(0, emit);
    }

    fn descend(&mut self, depth: usize, emit: &mut impl FnMut(&Self)) {
        if depth == self.positives.len() {
            emit(self);
            return;
        }
        let atom = self.positives[depth];
        let db = self.db;
        let rows = match db.get(&atom.relation) {
            Some(rows) => rows,
            None => return,
        };
        for row in rows {
            if let Some(touched) = self.bind(atom, row) {
                let ok = self.constraints_at[depth]
                    .iter()
                    .all(|&ci| self.check_constraint(ci))
                    && self.negations_at[depth].iter().all(|&bi| self.check_negation(bi));
                if ok {
                    self.descend(depth + 1, emit);
                }
                for v in touched {
                    self.bindings[v] = None;
                }
            }
        }
    }

    /// Bind `atom`'s variables against `row`; returns the newly bound
    /// variable indexes, or None when the row does not match.
    fn bind(&mut self, atom: &Atom, row: &[i64]) -> Option<Vec<usize>> {
        let mut touched = Vec::new();
        for (term, &value) in atom.terms.iter().zip(row) {
            let ok = match term {
                Term::Constant(c) => *c == value,
                Term::Placeholder => true,
                Term::Variable(v) => {
                    let idx = self.var_index[v.as_str()];
                    match self.bindings[idx] {
                        Some(bound) => bound == value,
                        None => {
                            self.bindings[idx] = Some(value);
                            touched.push(idx);
                            true
                        }
                    }
                }
            };
            if !ok {
                for v in touched {
                    self.bindings[v] = None;
                }
                return None;
            }
        }
        Some(touched)
    }

    fn check_constraint(&self, index: usize) -> bool {
        let c = &self.rule.constraints[index];
        c.op.eval(self.eval_term(&c.left), self.eval_term(&c.right))
    }

    fn check_negation(&self, body_index: usize) -> bool {
        let atom = &self.rule.body[body_index];
        let rows = match self.db.get(&atom.relation) {
            Some(rows) => rows,
            None => return true,
        };
        !rows.iter().any(|row| self.matches_bound(atom, row))
    }

    fn matches_bound(&self, atom: &Atom, row: &[i64]) -> bool {
        atom.terms.iter().zip(row).all(|(term, &value)| match term {
            Term::Constant(c) => *c == value,
            Term::Placeholder => true,
            Term::Variable(v) => self.bindings[self.var_index[v.as_str()]] == Some(value),
        })
    }

    fn eval_term(&self, term: &Term) -> i64 {
        match term {
            Term::Constant(c) => *c,
            Term::Variable(v) => {
                self.bindings[self.var_index[v.as_str()]].expect("safety: head variable bound")
            }
            Term::Placeholder => unreachable!("placeholders never reach evaluation"),
        }
    }

    fn eval_agg(&self, expr: &AggExpr) -> i64 {
        match expr {
            AggExpr::Const(c) => *c,
            AggExpr::Var(v) => self.bindings[self.var_index[v.as_str()]].expect("bound"),
            AggExpr::AddVar(a, b) => {
                self.bindings[self.var_index[a.as_str()]].expect("bound")
                    + self.bindings[self.var_index[b.as_str()]].expect("bound")
            }
            AggExpr::AddConst(a, c) => {
                self.bindings[self.var_index[a.as_str()]].expect("bound") + c
            }
        }
    }
}
