//! Difference types attached to tuples during evaluation.
//!
//! Every intermediate collection pairs each row with a diff drawn from a
//! commutative monoid: diffs add when the same row arrives twice (concat,
//! consolidation) and multiply across a join. Set semantics uses
//! [`Presence`], which carries no data at all; [`Count`] tracks derivation
//! multiplicities instead. Both reach the same relation contents because
//! every rule output passes through a distinct step, which is exactly the
//! cast from counts back to presence.
//!
//! Antijoins subtract, which a monoid cannot express, so the right side is
//! first collapsed to presence: a left row is kept iff its key has no
//! present match, i.e. the subtracted quantity is 0 or the whole left diff.
//! Count diffs therefore never go negative.

/// A commutative monoid with a multiplication, as carried by tuples.
pub trait Diff: Copy + Eq + Send + Sync + std::fmt::Debug + 'static {
    /// The diff of a freshly scanned row.
    fn one() -> Self;
    /// Combine two diffs for the same row.
    fn plus(self, other: Self) -> Self;
    /// Combine diffs of rows paired by a join.
    fn times(self, other: Self) -> Self;
    /// Zero diffs mean the row is absent and is dropped on consolidation.
    fn is_zero(self) -> bool;
    /// Collapse to set membership.
    fn present(self) -> bool {
        !self.is_zero()
    }
}

/// Set semantics: a stored row is present, and that is all there is to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Presence;

impl Diff for Presence {
    fn one() -> Self {
        Presence
    }
    fn plus(self, _: Self) -> Self {
        Presence
    }
    fn times(self, _: Self) -> Self {
        Presence
    }
    fn is_zero(self) -> bool {
        false
    }
}

/// Multiset semantics: how many distinct derivations produced the row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Count(pub i64);

impl Diff for Count {
    fn one() -> Self {
        Count(1)
    }
    fn plus(self, other: Self) -> Self {
        Count(self.0 + other.0)
    }
    fn times(self, other: Self) -> Self {
        Count(self.0 * other.0)
    }
    fn is_zero(self) -> bool {
        self.0 == 0
    }
}
