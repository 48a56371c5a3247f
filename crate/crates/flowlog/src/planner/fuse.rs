//! Operator fusion: collapse projection chains into single passes.
//!
//! Two rewrites, applied bottom-up until fixpoint: a map over a map
//! composes into one map, and a map over a join becomes a join that
//! filters and projects its matches inline. Join inputs and antijoin
//! results are never fused into, because those are the materialization
//! points arrangements and sharing rely on.

use super::ir::{FilterCond, PlanNode, ProjSource};

pub fn fuse(plan: PlanNode) -> PlanNode {
    match plan {
        PlanNode::Scan { .. } => plan,
        PlanNode::FlatMap { input, filters, key, val } => attach(fuse(*input), filters, key, val),
        PlanNode::Join { left, right, key_len } => PlanNode::Join {
            left: Box::new(fuse(*left)),
            right: Box::new(fuse(*right)),
            key_len,
        },
        PlanNode::JoinFlatMap { left, right, key_len, filters, key, val } => {
            PlanNode::JoinFlatMap {
                left: Box::new(fuse(*left)),
                right: Box::new(fuse(*right)),
                key_len,
                filters,
                key,
                val,
            }
        }
        PlanNode::Antijoin { left, right, key_len } => PlanNode::Antijoin {
            left: Box::new(fuse(*left)),
            right: Box::new(fuse(*right)),
            key_len,
        },
    }
}

/// Put a filter+projection stage on top of an already fused input,
/// merging it downward where a rewrite applies.
fn attach(
    input: PlanNode,
    filters: Vec<FilterCond>,
    key: Vec<ProjSource>,
    val: Vec<ProjSource>,
) -> PlanNode {
    match input {
        PlanNode::FlatMap { input: inner, filters: f1, key: k1, val: v1 } => {
            let sources: Vec<ProjSource> = k1.iter().chain(&v1).copied().collect();
            match substitute(&filters, &key, &val, &sources) {
                Some((f2, key, val)) => {
                    let mut filters = f1;
                    filters.extend(f2);
                    attach(*inner, filters, key, val)
                }
                None => PlanNode::FlatMap {
                    input: Box::new(PlanNode::FlatMap {
                        input: inner,
                        filters: f1,
                        key: k1,
                        val: v1,
                    }),
                    filters,
                    key,
                    val,
                },
            }
        }
        PlanNode::Join { left, right, key_len } => {
            PlanNode::JoinFlatMap { left, right, key_len, filters, key, val }
        }
        PlanNode::JoinFlatMap { left, right, key_len, filters: f1, key: k1, val: v1 } => {
            let sources: Vec<ProjSource> = k1.iter().chain(&v1).copied().collect();
            match substitute(&filters, &key, &val, &sources) {
                Some((f2, key, val)) => {
                    let mut filters = f1;
                    filters.extend(f2);
                    PlanNode::JoinFlatMap { left, right, key_len, filters, key, val }
                }
                None => PlanNode::FlatMap {
                    input: Box::new(PlanNode::JoinFlatMap {
                        left,
                        right,
                        key_len,
                        filters: f1,
                        key: k1,
                        val: v1,
                    }),
                    filters,
                    key,
                    val,
                },
            }
        }
        other => PlanNode::FlatMap { input: Box::new(other), filters, key, val },
    }
}

/// Rewrite a stage's filters and projections to read the input of the
/// stage below, whose output columns come from `sources`. Bails (fusion
/// is skipped) when that would nest additions.
fn substitute(
    filters: &[FilterCond],
    key: &[ProjSource],
    val: &[ProjSource],
    sources: &[ProjSource],
) -> Option<(Vec<FilterCond>, Vec<ProjSource>, Vec<ProjSource>)> {
    let filters = filters.iter().map(|f| subst_filter(*f, sources)).collect::<Option<_>>()?;
    let key = key.iter().map(|s| subst_source(*s, sources)).collect::<Option<_>>()?;
    let val = val.iter().map(|s| subst_source(*s, sources)).collect::<Option<_>>()?;
    Some((filters, key, val))
}

fn subst_source(s: ProjSource, sources: &[ProjSource]) -> Option<ProjSource> {
    Some(match s {
        ProjSource::Col(i) => sources[i],
        ProjSource::Const(c) => ProjSource::Const(c),
        ProjSource::AddCols(i, j) => match (sources[i], sources[j]) {
            (ProjSource::Col(a), ProjSource::Col(b)) => ProjSource::AddCols(a, b),
            (ProjSource::Col(a), ProjSource::Const(c))
            | (ProjSource::Const(c), ProjSource::Col(a)) => ProjSource::AddConst(a, c),
            (ProjSource::Const(a), ProjSource::Const(b)) => ProjSource::Const(a + b),
            _ => return None,
        },
        ProjSource::AddConst(i, c) => match sources[i] {
            ProjSource::Col(a) => ProjSource::AddConst(a, c),
            ProjSource::Const(k) => ProjSource::Const(k + c),
            ProjSource::AddConst(a, k) => ProjSource::AddConst(a, k + c),
            ProjSource::AddCols(_, _) => return None,
        },
    })
}

fn subst_filter(f: FilterCond, sources: &[ProjSource]) -> Option<FilterCond> {
    Some(match f {
        FilterCond::CompareCols(i, op, j) => match (sources[i], sources[j]) {
            (ProjSource::Col(a), ProjSource::Col(b)) => FilterCond::CompareCols(a, op, b),
            (ProjSource::Col(a), ProjSource::Const(c)) => FilterCond::CompareConst(a, op, c),
            (ProjSource::Const(c), ProjSource::Col(b)) => {
                FilterCond::CompareConst(b, op.flipped(), c)
            }
            _ => return None,
        },
        FilterCond::CompareConst(i, op, c) => match sources[i] {
            ProjSource::Col(a) => FilterCond::CompareConst(a, op, c),
            _ => return None,
        },
    })
}
