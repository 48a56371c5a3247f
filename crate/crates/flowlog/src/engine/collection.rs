//! Sorted tuple collections and the operator kernels that run plans.
//!
//! A [`Collection`] keeps rows sorted and distinct with nonzero diffs, so a
//! collection whose layout starts with a key block is already arranged: the
//! rows of one key group are adjacent. Joins and antijoins walk two such
//! collections with merging cursors; maps rebuild rows and re-consolidate.
//!
//! Kernels take a worker count. With more than one worker the input is cut
//! into contiguous chunks processed on scoped threads and the chunk outputs
//! are concatenated in order, which yields byte-identical results to the
//! single-worker path.

use smallvec::SmallVec;

use super::monoid::Diff;
use crate::planner::{FilterCond, ProjSource};

/// One tuple. Inline up to four columns; most relations are that narrow.
pub type Row = SmallVec<[i64; 4]>;

/// Build a row from a slice, mostly for tests.
pub fn row(values: &[i64]) -> Row {
    SmallVec::from_slice(values)
}

/// Sorted, distinct rows paired with nonzero diffs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collection<D> {
    pub rows: Vec<(Row, D)>,
}

impl<D: Diff> Collection<D> {
    pub fn empty() -> Self {
        Collection { rows: Vec::new() }
    }

    /// Wrap rows that are already sorted, distinct, and nonzero.
    pub fn from_sorted(rows: Vec<(Row, D)>) -> Self {
        debug_assert!(rows.windows(2).all(|w| w[0].0 < w[1].0), "rows out of order");
        debug_assert!(rows.iter().all(|(_, d)| !d.is_zero()), "zero diff survived");
        Collection { rows }
    }

    /// Sort, add up diffs of equal rows, and drop the zeros.
    pub fn consolidate(mut rows: Vec<(Row, D)>) -> Self {
        rows.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Row, D)> = Vec::with_capacity(rows.len());
        for (row, diff) in rows {
            match out.last_mut() {
                Some((last, acc)) if *last == row => *acc = acc.plus(diff),
                _ => {
                    if let Some((_, acc)) = out.last() {
                        if acc.is_zero() {
                            out.pop();
                        }
                    }
                    out.push((row, diff));
                }
            }
        }
        if let Some((_, acc)) = out.last() {
            if acc.is_zero() {
                out.pop();
            }
        }
        Collection { rows: out }
    }

    /// Merge two collections, adding diffs of rows present in both.
    pub fn merge(&self, other: &Self) -> Self {
        let (a, b) = (&self.rows, &other.rows);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let sum = a[i].1.plus(b[j].1);
                    if !sum.is_zero() {
                        out.push((a[i].0.clone(), sum));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Collection { rows: out }
    }

    /// Reset every diff to one: the multiset collapsed back to a set.
    pub fn distinct(&self) -> Self {
        Collection {
            rows: self.rows.iter().map(|(r, _)| (r.clone(), D::one())).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Below this many rows a kernel stays on the calling thread.
const PARALLEL_THRESHOLD: usize = 2048;

/// Run `work` over `0..len` split into contiguous chunks, one per worker,
/// and concatenate the chunk outputs in order.
fn chunked<T, F>(len: usize, workers: usize, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> Vec<T> + Sync,
{
    if workers <= 1 || len < PARALLEL_THRESHOLD {
        return work(0..len);
    }
    let chunk = len.div_ceil(workers);
    let ranges: Vec<_> = (0..workers)
        .map(|w| (w * chunk).min(len)..((w + 1) * chunk).min(len))
        .filter(|r| !r.is_empty())
        .collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = ranges
            .into_iter()
            .map(|range| scope.spawn(|| work(range)))
            .collect();
        let mut out = Vec::new();
        for handle in handles {
            out.extend(handle.join().expect("kernel worker panicked"));
        }
        out
    })
}

fn project(sources: &[ProjSource], input: &[i64], out: &mut Row) {
    out.extend(sources.iter().map(|s| s.apply(input)));
}

/// Filter rows, then emit the new (key, value) layout per survivor.
pub fn flat_map<D: Diff>(
    input: &Collection<D>,
    filters: &[FilterCond],
    key: &[ProjSource],
    val: &[ProjSource],
    workers: usize,
) -> Collection<D> {
    let rows = &input.rows;
    let mapped = chunked(rows.len(), workers, |range| {
        let mut out = Vec::with_capacity(range.len());
        for (row, diff) in &rows[range] {
            if filters.iter().all(|f| f.accepts(row)) {
                let mut next = Row::with_capacity(key.len() + val.len());
                project(key, row, &mut next);
                project(val, row, &mut next);
                out.push((next, *diff));
            }
        }
        out
    });
    Collection::consolidate(mapped)
}

/// End of the key group starting at `at`.
fn group_end<D>(rows: &[(Row, D)], at: usize, key_len: usize) -> usize {
    let key = &rows[at].0[..key_len];
    let mut end = at + 1;
    while end < rows.len() && &rows[end].0[..key_len] == key {
        end += 1;
    }
    end
}

/// Walk aligned key groups of two sorted slices, calling `matched` with
/// each pair of group slices. `left` drives: the walk starts at its first
/// row of `range` and right is positioned by binary search, which lets a
/// caller shard over left chunks.
fn join_groups<D: Diff, T, F>(
    left: &[(Row, D)],
    right: &[(Row, D)],
    key_len: usize,
    range: std::ops::Range<usize>,
    out: &mut Vec<T>,
    mut matched: F,
) where
    F: FnMut(&[(Row, D)], &[(Row, D)], &mut Vec<T>),
{
    let mut i = range.start;
    let mut j = right.partition_point(|(row, _)| {
        left.get(i).is_some_and(|(l, _)| row[..key_len] < l[..key_len])
    });
    while i < range.end && j < right.len() {
        let lkey = &left[i].0[..key_len];
        let rkey = &right[j].0[..key_len];
        match lkey.cmp(rkey) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                // A group split by the chunk boundary is finished by the
                // next chunk, which starts right of the cut.
                let li = group_end(left, i, key_len).min(range.end);
                let rj = group_end(right, j, key_len);
                matched(&left[i..li], &right[j..rj], out);
                i = li;
                j = rj;
            }
        }
    }
}

/// Match on the first `key_len` columns; the output row is the key, then
/// left values, then right values, with diffs multiplied.
pub fn join<D: Diff>(
    left: &Collection<D>,
    right: &Collection<D>,
    key_len: usize,
    workers: usize,
) -> Collection<D> {
    let (l, r) = (&left.rows, &right.rows);
    let rows = chunked(l.len(), workers, |range| {
        let mut out = Vec::new();
        join_groups(l, r, key_len, range, &mut out, |lg, rg, out| {
            for (lrow, ld) in lg {
                for (rrow, rd) in rg {
                    let mut next = Row::with_capacity(lrow.len() + rrow.len() - key_len);
                    next.extend_from_slice(lrow);
                    next.extend_from_slice(&rrow[key_len..]);
                    out.push((next, ld.times(*rd)));
                }
            }
        });
        out
    });
    // Pairs inherit the (key, left value, right value) order, so the
    // output is already sorted and distinct.
    Collection::from_sorted(rows)
}

/// A join whose downstream filter and projection run per matched pair,
/// without materializing the joined row stream.
pub fn join_flat_map<D: Diff>(
    left: &Collection<D>,
    right: &Collection<D>,
    key_len: usize,
    filters: &[FilterCond],
    key: &[ProjSource],
    val: &[ProjSource],
    workers: usize,
) -> Collection<D> {
    let (l, r) = (&left.rows, &right.rows);
    let rows = chunked(l.len(), workers, |range| {
        let mut out = Vec::new();
        let mut joined = Row::new();
        join_groups(l, r, key_len, range, &mut out, |lg, rg, out| {
            for (lrow, ld) in lg {
                for (rrow, rd) in rg {
                    joined.clear();
                    joined.extend_from_slice(lrow);
                    joined.extend_from_slice(&rrow[key_len..]);
                    if filters.iter().all(|f| f.accepts(&joined)) {
                        let mut next = Row::with_capacity(key.len() + val.len());
                        project(key, &joined, &mut next);
                        project(val, &joined, &mut next);
                        out.push((next, ld.times(*rd)));
                    }
                }
            }
        });
        out
    });
    Collection::consolidate(rows)
}

/// Keep left rows whose key block has no present match in right. The right
/// side only contributes presence, so diffs pass through unchanged.
pub fn antijoin<D: Diff>(
    left: &Collection<D>,
    right: &Collection<D>,
    key_len: usize,
    workers: usize,
) -> Collection<D> {
    let (l, r) = (&left.rows, &right.rows);
    let rows = chunked(l.len(), workers, |range| {
        let mut out = Vec::with_capacity(range.len());
        let mut j = r.partition_point(|(row, _)| {
            l.get(range.start).is_some_and(|(first, _)| row[..key_len] < first[..key_len])
        });
        for (row, diff) in &l[range] {
            let key = &row[..key_len];
            while j < r.len() && r[j].0[..key_len] < *key {
                j += 1;
            }
            if !(j < r.len() && r[j].0[..key_len] == *key) {
                out.push((row.clone(), *diff));
            }
        }
        out
    });
    Collection::from_sorted(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::monoid::{Count, Presence};
    use crate::frontend::CmpOp;

    fn counted(rows: &[(&[i64], i64)]) -> Collection<Count> {
        Collection::consolidate(
            rows.iter().map(|&(r, n)| (row(r), Count(n))).collect(),
        )
    }

    #[test]
    fn consolidation_sums_diffs_and_drops_zeros() {
        let c = Collection::consolidate(vec![
            (row(&[2]), Count(1)),
            (row(&[1]), Count(4)),
            (row(&[1]), Count(3)),
            (row(&[3]), Count(2)),
            (row(&[3]), Count(-2)),
        ]);
        assert_eq!(c, counted(&[(&[1], 7), (&[2], 1)]));
    }

    #[test]
    fn merge_adds_up_shared_rows() {
        let a = counted(&[(&[1], 4), (&[2], 1)]);
        let b = counted(&[(&[1], 3), (&[3], 5)]);
        assert_eq!(a.merge(&b), counted(&[(&[1], 7), (&[2], 1), (&[3], 5)]));
    }

    #[test]
    fn join_multiplies_diffs_of_matched_pairs() {
        let l = counted(&[(&[1, 10], 4)]);
        let r = counted(&[(&[1, 20], 3)]);
        assert_eq!(join(&l, &r, 1, 1), counted(&[(&[1, 10, 20], 12)]));
    }

    #[test]
    fn distinct_collapses_multiplicities() {
        let c = counted(&[(&[1, 10, 20], 12)]);
        assert_eq!(c.distinct(), counted(&[(&[1, 10, 20], 1)]));
    }

    #[test]
    fn antijoin_drops_rows_whose_key_is_present() {
        let l = counted(&[(&[1, 5], 1), (&[2, 6], 3)]);
        // Multiplicity on the right is irrelevant: only presence counts.
        let r = counted(&[(&[1], 7)]);
        assert_eq!(antijoin(&l, &r, 1, 1), counted(&[(&[2, 6], 3)]));
    }

    #[test]
    fn flat_map_filters_and_reprojects() {
        let c = counted(&[(&[1, 2], 1), (&[3, 3], 1), (&[4, 2], 1)]);
        let got = flat_map(
            &c,
            &[FilterCond::CompareCols(0, CmpOp::Ne, 1)],
            &[ProjSource::Col(1)],
            &[ProjSource::AddConst(0, 100)],
            1,
        );
        assert_eq!(got, counted(&[(&[2, 101], 1), (&[2, 104], 1)]));
    }

    #[test]
    fn flat_map_consolidates_projection_collisions() {
        let c = counted(&[(&[1, 7], 1), (&[2, 7], 1)]);
        let got = flat_map(&c, &[], &[ProjSource::Col(1)], &[], 1);
        assert_eq!(got, counted(&[(&[7], 2)]));
    }

    #[test]
    fn join_flat_map_applies_filters_to_the_joined_row() {
        let l = counted(&[(&[1, 10], 1), (&[1, 30], 1)]);
        let r = counted(&[(&[1, 20], 1)]);
        let got = join_flat_map(
            &l,
            &r,
            1,
            &[FilterCond::CompareCols(1, CmpOp::Lt, 2)],
            &[ProjSource::Col(1)],
            &[ProjSource::Col(2)],
            1,
        );
        assert_eq!(got, counted(&[(&[10, 20], 1)]));
    }

    #[test]
    fn presence_collections_behave_as_sets() {
        let a = Collection::consolidate(vec![
            (row(&[1]), Presence),
            (row(&[1]), Presence),
            (row(&[2]), Presence),
        ]);
        assert_eq!(a.len(), 2);
        let joined = join(&a, &a, 1, 1);
        assert_eq!(joined.len(), 2);
    }

    #[test]
    fn kernels_are_worker_count_invariant() {
        // Enough rows to cross the parallel threshold.
        let rows: Vec<(Row, Count)> =
            (0..5000).map(|i| (row(&[i % 97, i]), Count(1))).collect();
        let c = Collection::consolidate(rows);
        let keyed: Vec<(Row, Count)> =
            c.rows.iter().map(|(r, d)| (row(&[r[0], r[1]]), *d)).collect();
        let c = Collection::from_sorted(keyed);

        for workers in [2, 4] {
            assert_eq!(join(&c, &c, 1, workers), join(&c, &c, 1, 1));
            assert_eq!(antijoin(&c, &c, 1, workers), antijoin(&c, &c, 1, 1));
            let f = |w| flat_map(&c, &[], &[ProjSource::Col(1)], &[], w);
            assert_eq!(f(workers), f(1));
        }
    }
}
