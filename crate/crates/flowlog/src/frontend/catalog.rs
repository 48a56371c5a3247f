//! Per-rule body classification: join nodes, semijoin atoms, antijoin
//! obligations, and filter placement.
//!
//! A positive atom whose variables are all covered by another positive atom
//! adds nothing to the join search space; it only restricts its coverer. The
//! catalog demotes such atoms to semijoin filters so the optimizer plans over
//! the remaining nodes. Occurrences of the rule's own head relation are never
//! demoted: they are the recursion frontier, and keeping them as first-class
//! join inputs lets the engine swap them between full and delta readings.

use std::collections::BTreeSet;

use super::ast::{Rule, Term};

/// A positive body atom that survives as a join-graph node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogAtom {
    /// Index into the rule's body.
    pub body_index: usize,
    /// Distinct variables of the atom, in term order.
    pub vars: Vec<String>,
}

impl CatalogAtom {
    pub fn var_set(&self) -> BTreeSet<&str> {
        self.vars.iter().map(String::as_str).collect()
    }

    /// Number of variables this node shares with `other`.
    pub fn shared_with(&self, other: &CatalogAtom) -> usize {
        let mine = self.var_set();
        other.vars.iter().filter(|v| mine.contains(v.as_str())).count()
    }
}

/// A positive atom absorbed into a node that binds all its variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemijoinAtom {
    /// Index into the rule's body.
    pub body_index: usize,
    /// Body index of the node atom it filters.
    pub host: usize,
    /// Variables shared with the host: all of this atom's variables.
    pub vars: Vec<String>,
}

/// A negated atom, applied as an antijoin once its variables are bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AntijoinObligation {
    /// Index into the rule's body.
    pub body_index: usize,
    /// Distinct variables of the negated atom, in term order.
    pub vars: Vec<String>,
}

/// Where a constraint is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterSite {
    /// A single node atom binds every variable; filter its scan.
    Atom(usize),
    /// Variables span atoms; filter above the lowest join binding them all.
    AfterJoin,
}

/// Structural classification of one rule's body.
#[derive(Debug, Clone)]
pub struct RuleCatalog {
    pub rule_id: usize,
    /// Join-graph nodes in body order. Never empty for a safe rule.
    pub nodes: Vec<CatalogAtom>,
    pub semijoins: Vec<SemijoinAtom>,
    pub antijoins: Vec<AntijoinObligation>,
    /// Parallel to the rule's constraint list.
    pub filters: Vec<FilterSite>,
    /// First-occurrence order of variables across positive body atoms.
    pub var_order: Vec<String>,
    /// Variables the head terms and aggregate argument consume.
    pub head_needs: BTreeSet<String>,
}

impl RuleCatalog {
    /// Semijoin atoms attached to the node at `host` (a body index).
    pub fn semijoins_on(&self, host: usize) -> impl Iterator<Item = &SemijoinAtom> {
        self.semijoins.iter().filter(move |s| s.host == host)
    }

    /// Constraint indexes attached to the node at `body_index`.
    pub fn filters_on(&self, body_index: usize) -> impl Iterator<Item = usize> + '_ {
        self.filters
            .iter()
            .enumerate()
            .filter(move |(_, site)| **site == FilterSite::Atom(body_index))
            .map(|(i, _)| i)
    }
}

/// Classify a validated rule's body.
pub fn build_rule_catalog(rule: &Rule) -> RuleCatalog {
    let positives: Vec<(usize, Vec<String>)> =
        rule.positive_atoms().map(|(i, a)| (i, a.variables())).collect();
    let var_sets: Vec<BTreeSet<&str>> = positives
        .iter()
        .map(|(_, vars)| vars.iter().map(String::as_str).collect())
        .collect();

    // An atom is demoted when some other positive atom strictly covers its
    // variables, or covers them equally and wins the survivor comparison.
    // The comparison key is the atom's rendering, so the outcome does not
    // depend on body order (spec'd apart: permuting a body must reclassify
    // to the same atom set); body index only splits exact duplicates.
    let exempt = |i: usize| rule.body[i].relation == rule.head.relation;
    let key = |i: usize| (rule.body[i].to_string(), i);
    let mut demoted = vec![false; positives.len()];
    for (p, &(i, _)) in positives.iter().enumerate() {
        if exempt(i) {
            continue;
        }
        demoted[p] = positives.iter().enumerate().any(|(q, &(j, _))| {
            p != q
                && var_sets[p].is_subset(&var_sets[q])
                && (var_sets[p].len() < var_sets[q].len() || exempt(j) || key(j) < key(i))
        });
    }

    let nodes: Vec<CatalogAtom> = positives
        .iter()
        .enumerate()
        .filter(|(p, _)| !demoted[*p])
        .map(|(_, (i, vars))| CatalogAtom { body_index: *i, vars: vars.clone() })
        .collect();

    let semijoins: Vec<SemijoinAtom> = positives
        .iter()
        .enumerate()
        .filter(|(p, _)| demoted[*p])
        .map(|(p, (i, vars))| {
            // Every coverer chain ends at a node, so a host always exists.
            // All covering nodes share exactly this atom's variables, which
            // makes "most shared variables" a tie broken by body order.
            let host = nodes
                .iter()
                .filter(|n| var_sets[p].iter().all(|v| n.vars.iter().any(|w| w == v)))
                .map(|n| n.body_index)
                .min()
                .expect("demoted atom has a covering node");
            SemijoinAtom { body_index: *i, host, vars: vars.clone() }
        })
        .collect();

    let antijoins = rule
        .negated_atoms()
        .map(|(i, a)| AntijoinObligation { body_index: i, vars: a.variables() })
        .collect();

    let filters = rule
        .constraints
        .iter()
        .map(|c| {
            let needed = c.variables();
            nodes
                .iter()
                .find(|n| needed.iter().all(|v| n.vars.iter().any(|w| w == v)))
                .map(|n| FilterSite::Atom(n.body_index))
                .unwrap_or(FilterSite::AfterJoin)
        })
        .collect();

    let mut head_needs: BTreeSet<String> = rule
        .head
        .terms
        .iter()
        .filter_map(|t| match t {
            Term::Variable(v) => Some(v.clone()),
            _ => None,
        })
        .collect();
    if let Some(agg) = &rule.aggregate {
        head_needs.extend(agg.over.variables().iter().map(|v| v.to_string()));
    }

    RuleCatalog {
        rule_id: rule.id,
        nodes,
        semijoins,
        antijoins,
        filters,
        var_order: rule.positive_var_order(),
        head_needs,
    }
}
