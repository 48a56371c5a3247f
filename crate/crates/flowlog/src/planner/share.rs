//! Cross-rule subplan sharing by hash-consing.
//!
//! Plans are positional, so two subplans that do the same work are equal
//! values regardless of which rules or variable names produced them.
//! Interning every node gives each distinct computation one dag id; the
//! evaluator then computes and arranges it once per round, no matter how
//! many rules reference it.

use std::collections::HashMap;

use super::ir::{Op, PlanDag, PlanNode, RulePlans};

pub struct DagBuilder {
    ops: Vec<Op>,
    memo: HashMap<Op, usize>,
    share: bool,
    shared_count: usize,
}

impl DagBuilder {
    /// `share: false` still builds a dag, but every reference gets its own
    /// node: the comparison baseline for measuring what sharing saves.
    pub fn new(share: bool) -> DagBuilder {
        DagBuilder { ops: Vec::new(), memo: HashMap::new(), share, shared_count: 0 }
    }

    /// Intern a plan tree; returns the id of its root.
    pub fn intern(&mut self, plan: &PlanNode) -> usize {
        let op = match plan {
            PlanNode::Scan { relation, role, arity } => {
                Op::Scan { relation: relation.clone(), role: *role, arity: *arity }
            }
            PlanNode::FlatMap { input, filters, key, val } => Op::FlatMap {
                input: self.intern(input),
                filters: filters.clone(),
                key: key.clone(),
                val: val.clone(),
            },
            PlanNode::Join { left, right, key_len } => Op::Join {
                left: self.intern(left),
                right: self.intern(right),
                key_len: *key_len,
            },
            PlanNode::JoinFlatMap { left, right, key_len, filters, key, val } => {
                Op::JoinFlatMap {
                    left: self.intern(left),
                    right: self.intern(right),
                    key_len: *key_len,
                    filters: filters.clone(),
                    key: key.clone(),
                    val: val.clone(),
                }
            }
            PlanNode::Antijoin { left, right, key_len } => Op::Antijoin {
                left: self.intern(left),
                right: self.intern(right),
                key_len: *key_len,
            },
        };
        if self.share {
            if let Some(&id) = self.memo.get(&op) {
                self.shared_count += 1;
                return id;
            }
        }
        let id = self.ops.len();
        self.ops.push(op.clone());
        if self.share {
            self.memo.insert(op, id);
        }
        id
    }

    pub fn finish(self, rules: Vec<RulePlans>) -> PlanDag {
        PlanDag { ops: self.ops, rules, shared_count: self.shared_count }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::ir::{ProjSource, Role};

    fn keyed_edge_scan() -> PlanNode {
        PlanNode::FlatMap {
            input: Box::new(PlanNode::Scan {
                relation: "edge".into(),
                role: Role::Edb,
                arity: 2,
            }),
            filters: Vec::new(),
            key: vec![ProjSource::Col(1)],
            val: vec![ProjSource::Col(0)],
        }
    }

    #[test]
    fn identical_trees_intern_to_one_id() {
        let mut b = DagBuilder::new(true);
        let a = b.intern(&keyed_edge_scan());
        let c = b.intern(&keyed_edge_scan());
        assert_eq!(a, c);
        let dag = b.finish(Vec::new());
        assert_eq!(dag.ops.len(), 2); // scan + map
        assert_eq!(dag.shared_count, 2); // second tree reused both nodes
    }

    #[test]
    fn sharing_off_duplicates_every_node() {
        let mut b = DagBuilder::new(false);
        let a = b.intern(&keyed_edge_scan());
        let c = b.intern(&keyed_edge_scan());
        assert_ne!(a, c);
        let dag = b.finish(Vec::new());
        assert_eq!(dag.ops.len(), 4);
        assert_eq!(dag.shared_count, 0);
    }

    #[test]
    fn children_always_precede_parents() {
        let mut b = DagBuilder::new(true);
        let join = PlanNode::Join {
            left: Box::new(keyed_edge_scan()),
            right: Box::new(keyed_edge_scan()),
            key_len: 1,
        };
        let root = b.intern(&join);
        let dag = b.finish(Vec::new());
        for (id, op) in dag.ops.iter().enumerate() {
            for child in op.children() {
                assert!(child < id);
            }
        }
        assert_eq!(root, dag.ops.len() - 1);
    }
}
