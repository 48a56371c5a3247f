//! Positional operator IR for rule plans.
//!
//! A subplan produces keyed rows: a key column block followed by a value
//! block. Filters and projections address columns of that concatenated
//! layout by position, never by name, so two subplans that do the same
//! thing to different variables are structurally identical. That is what
//! makes cross-rule sharing a matter of equality.

use std::collections::BTreeSet;
use std::fmt;

use crate::frontend::CmpOp;

/// Which version of a relation a scan reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    /// Base relation: loaded once, never changes.
    Edb,
    /// A derived relation's accumulated contents.
    Full,
    /// The tuples a derived relation gained in the previous round.
    Delta,
}

impl Role {
    pub fn tag(self) -> &'static str {
        match self {
            Role::Edb => "edb",
            Role::Full => "full",
            Role::Delta => "delta",
        }
    }
}

/// Where one output column's value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProjSource {
    Col(usize),
    Const(i64),
    /// Sum of two columns; carries aggregate arguments like `d + w`.
    AddCols(usize, usize),
    AddConst(usize, i64),
}

impl ProjSource {
    pub fn apply(self, row: &[i64]) -> i64 {
        match self {
            ProjSource::Col(i) => row[i],
            ProjSource::Const(c) => c,
            ProjSource::AddCols(i, j) => row[i] + row[j],
            ProjSource::AddConst(i, c) => row[i] + c,
        }
    }
}

impl fmt::Display for ProjSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjSource::Col(i) => write!(f, "c{i}"),
            ProjSource::Const(c) => write!(f, "{c}"),
            ProjSource::AddCols(i, j) => write!(f, "c{i}+c{j}"),
            ProjSource::AddConst(i, c) => write!(f, "c{i}+{c}"),
        }
    }
}

/// A row predicate over the input layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterCond {
    CompareCols(usize, CmpOp, usize),
    CompareConst(usize, CmpOp, i64),
}

impl FilterCond {
    pub fn accepts(self, row: &[i64]) -> bool {
        match self {
            FilterCond::CompareCols(i, op, j) => op.eval(row[i], row[j]),
            FilterCond::CompareConst(i, op, c) => op.eval(row[i], c),
        }
    }
}

impl fmt::Display for FilterCond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterCond::CompareCols(i, op, j) => write!(f, "c{i} {} c{j}", op.symbol()),
            FilterCond::CompareConst(i, op, c) => write!(f, "c{i} {} {c}", op.symbol()),
        }
    }
}

/// One rule's plan as a tree; sharing later rebuilds it as dag nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanNode {
    Scan {
        relation: String,
        role: Role,
        arity: usize,
    },
    /// Filter rows, then emit a new (key, value) layout.
    FlatMap {
        input: Box<PlanNode>,
        filters: Vec<FilterCond>,
        key: Vec<ProjSource>,
        val: Vec<ProjSource>,
    },
    /// Match inputs on their first `key_len` columns; output layout is
    /// key, then left values, then right values.
    Join {
        left: Box<PlanNode>,
        right: Box<PlanNode>,
        key_len: usize,
    },
    /// A join with the downstream filter and projection fused in.
    JoinFlatMap {
        left: Box<PlanNode>,
        right: Box<PlanNode>,
        key_len: usize,
        filters: Vec<FilterCond>,
        key: Vec<ProjSource>,
        val: Vec<ProjSource>,
    },
    /// Keep left rows whose key has no match in right; layout unchanged.
    Antijoin {
        left: Box<PlanNode>,
        right: Box<PlanNode>,
        key_len: usize,
    },
}

/// An interned plan node: children are [`PlanDag`] indexes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Op {
    Scan {
        relation: String,
        role: Role,
        arity: usize,
    },
    FlatMap {
        input: usize,
        filters: Vec<FilterCond>,
        key: Vec<ProjSource>,
        val: Vec<ProjSource>,
    },
    Join {
        left: usize,
        right: usize,
        key_len: usize,
    },
    JoinFlatMap {
        left: usize,
        right: usize,
        key_len: usize,
        filters: Vec<FilterCond>,
        key: Vec<ProjSource>,
        val: Vec<ProjSource>,
    },
    Antijoin {
        left: usize,
        right: usize,
        key_len: usize,
    },
}

impl Op {
    pub fn children(&self) -> Vec<usize> {
        match *self {
            Op::Scan { .. } => Vec::new(),
            Op::FlatMap { input, .. } => vec![input],
            Op::Join { left, right, .. }
            | Op::JoinFlatMap { left, right, .. }
            | Op::Antijoin { left, right, .. } => vec![left, right],
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Op::Scan { .. } => "scan",
            Op::FlatMap { .. } => "map",
            Op::Join { .. } => "join",
            Op::JoinFlatMap { .. } => "join+map",
            Op::Antijoin { .. } => "antijoin",
        }
    }
}

/// One evaluation entry point for a rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanVariant {
    /// Body index whose scan reads the delta; `None` is the base variant
    /// run when a stratum starts.
    pub delta_at: Option<usize>,
    pub root: usize,
}

/// All plan variants of one rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RulePlans {
    pub rule_id: usize,
    /// Head relation the variants derive into.
    pub relation: String,
    pub variants: Vec<PlanVariant>,
}

/// Every rule's plans over one interned node table. Node children always
/// have smaller indexes, so index order is a valid evaluation order.
#[derive(Debug, Clone)]
pub struct PlanDag {
    pub ops: Vec<Op>,
    pub rules: Vec<RulePlans>,
    /// References beyond the first to any node: the amount of work that
    /// sharing avoids repeating.
    pub shared_count: usize,
}

impl PlanDag {
    /// Key block width of a node's output.
    pub fn key_len(&self, id: usize) -> usize {
        match &self.ops[id] {
            Op::Scan { .. } => 0,
            Op::FlatMap { key, .. } | Op::JoinFlatMap { key, .. } => key.len(),
            Op::Join { key_len, .. } => *key_len,
            Op::Antijoin { left, .. } => self.key_len(*left),
        }
    }

    /// Total output width, key included.
    pub fn width(&self, id: usize) -> usize {
        match &self.ops[id] {
            Op::Scan { arity, .. } => *arity,
            Op::FlatMap { key, val, .. } | Op::JoinFlatMap { key, val, .. } => {
                key.len() + val.len()
            }
            Op::Join { left, right, key_len } => {
                self.width(*left) + self.width(*right) - key_len
            }
            Op::Antijoin { left, .. } => self.width(*left),
        }
    }

    /// Relations a subtree reads, with the role each scan uses.
    pub fn scan_set(&self, id: usize) -> BTreeSet<(String, Role)> {
        let mut out = BTreeSet::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            if let Op::Scan { relation, role, .. } = &self.ops[n] {
                out.insert((relation.clone(), *role));
            }
            stack.extend(self.ops[n].children());
        }
        out
    }

    /// How many times each node is referenced, by other nodes or as a
    /// variant root.
    pub fn refcounts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.ops.len()];
        for op in &self.ops {
            for c in op.children() {
                counts[c] += 1;
            }
        }
        for rule in &self.rules {
            for v in &rule.variants {
                counts[v.root] += 1;
            }
        }
        counts
    }

    /// One line per node, for plan explanations and golden tests.
    pub fn render(&self, id: usize) -> String {
        fn list<T: fmt::Display>(items: &[T]) -> String {
            let parts: Vec<String> = items.iter().map(T::to_string).collect();
            format!("[{}]", parts.join(", "))
        }
        match &self.ops[id] {
            Op::Scan { relation, role, arity } => {
                format!("scan {relation} ({}, arity {arity})", role.tag())
            }
            Op::FlatMap { input, filters, key, val } => {
                let mut s = format!("map #{input}");
                if !filters.is_empty() {
                    s.push_str(&format!(" where {}", list(filters)));
                }
                s.push_str(&format!(" key {} val {}", list(key), list(val)));
                s
            }
            Op::Join { left, right, key_len } => {
                format!("join #{left} with #{right} on {key_len}")
            }
            Op::JoinFlatMap { left, right, key_len, filters, key, val } => {
                let mut s = format!("join #{left} with #{right} on {key_len}");
                if !filters.is_empty() {
                    s.push_str(&format!(" where {}", list(filters)));
                }
                s.push_str(&format!(" key {} val {}", list(key), list(val)));
                s
            }
            Op::Antijoin { left, right, key_len } => {
                format!("antijoin #{left} minus #{right} on {key_len}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_sources_compute_from_rows() {
        let row = [10, 20, 3];
        assert_eq!(ProjSource::Col(1).apply(&row), 20);
        assert_eq!(ProjSource::Const(-4).apply(&row), -4);
        assert_eq!(ProjSource::AddCols(0, 2).apply(&row), 13);
        assert_eq!(ProjSource::AddConst(1, 5).apply(&row), 25);
    }

    #[test]
    fn filters_test_rows() {
        let row = [1, 2, 2];
        assert!(FilterCond::CompareCols(1, CmpOp::Eq, 2).accepts(&row));
        assert!(!FilterCond::CompareCols(0, CmpOp::Eq, 1).accepts(&row));
        assert!(FilterCond::CompareConst(0, CmpOp::Lt, 5).accepts(&row));
    }

    fn tiny_dag() -> PlanDag {
        let ops = vec![
            Op::Scan { relation: "edge".into(), role: Role::Edb, arity: 2 },
            Op::FlatMap {
                input: 0,
                filters: vec![],
                key: vec![ProjSource::Col(1)],
                val: vec![ProjSource::Col(0)],
            },
            Op::Scan { relation: "reach".into(), role: Role::Delta, arity: 1 },
            Op::FlatMap {
                input: 2,
                filters: vec![],
                key: vec![ProjSource::Col(0)],
                val: vec![],
            },
            Op::Join { left: 1, right: 3, key_len: 1 },
        ];
        PlanDag {
            ops,
            rules: vec![RulePlans {
                rule_id: 0,
                relation: "reach".into(),
                variants: vec![PlanVariant { delta_at: Some(2), root: 4 }],
            }],
            shared_count: 0,
        }
    }

    #[test]
    fn widths_and_key_lengths_flow_through_joins() {
        let dag = tiny_dag();
        assert_eq!(dag.width(0), 2);
        assert_eq!(dag.width(1), 2);
        assert_eq!(dag.key_len(1), 1);
        assert_eq!(dag.width(4), 2); // key y, value x
        assert_eq!(dag.key_len(4), 1);
    }

    #[test]
    fn scan_sets_collect_relation_roles() {
        let dag = tiny_dag();
        assert_eq!(
            dag.scan_set(4),
            [("edge".to_string(), Role::Edb), ("reach".to_string(), Role::Delta)].into()
        );
    }

    #[test]
    fn renderings_are_compact_one_liners() {
        let dag = tiny_dag();
        assert_eq!(dag.render(0), "scan edge (edb, arity 2)");
        assert_eq!(dag.render(1), "map #0 key [c1] val [c0]");
        assert_eq!(dag.render(4), "join #1 with #3 on 1");
    }

    #[test]
    fn refcounts_include_variant_roots() {
        let dag = tiny_dag();
        assert_eq!(dag.refcounts(), [1, 1, 1, 1, 1]);
    }
}
