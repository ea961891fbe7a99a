//! Bitmask sets of node labels.
//!
//! Nodes are labelled `0..n` with `n <= 64`; a [`NodeSet`] stores membership
//! as the bits of a `u64`.

use core::fmt;

/// Largest supported node count.
pub const MAX_NODES: usize = 64;

#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeSet(pub u64);

impl NodeSet {
    pub const EMPTY: NodeSet = NodeSet(0);

    #[inline]
    pub const fn singleton(node: usize) -> Self {
        NodeSet(1u64 << node)
    }

    /// The set `{0, .., n-1}`.
    #[inline]
    pub const fn full(n: usize) -> Self {
        if n >= 64 {
            NodeSet(u64::MAX)
        } else {
            NodeSet((1u64 << n) - 1)
        }
    }

    #[inline]
    pub const fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub const fn contains(self, node: usize) -> bool {
        self.0 >> node & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, node: usize) {
        self.0 |= 1u64 << node;
    }

    #[inline]
    pub fn remove(&mut self, node: usize) {
        self.0 &= !(1u64 << node);
    }

    #[inline]
    pub const fn with(self, node: usize) -> Self {
        NodeSet(self.0 | 1u64 << node)
    }

    #[inline]
    pub const fn without(self, node: usize) -> Self {
        NodeSet(self.0 & !(1u64 << node))
    }

    #[inline]
    pub const fn union(self, other: NodeSet) -> Self {
        NodeSet(self.0 | other.0)
    }

    #[inline]
    pub const fn intersection(self, other: NodeSet) -> Self {
        NodeSet(self.0 & other.0)
    }

    #[inline]
    pub const fn difference(self, other: NodeSet) -> Self {
        NodeSet(self.0 & !other.0)
    }

    #[inline]
    pub const fn intersects(self, other: NodeSet) -> bool {
        self.0 & other.0 != 0
    }

    #[inline]
    pub const fn is_subset(self, other: NodeSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Smallest member, if any.
    #[inline]
    pub const fn first(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros() as usize)
        }
    }

    /// The `k`-th smallest member (0-based).
    pub fn nth(self, k: usize) -> Option<usize> {
        self.iter().nth(k)
    }

    #[inline]
    pub fn iter(self) -> Iter {
        Iter(self.0)
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for NodeSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = NodeSet::EMPTY;
        for node in iter {
            set.insert(node);
        }
        set
    }
}

impl IntoIterator for NodeSet {
    type Item = usize;
    type IntoIter = Iter;

    fn into_iter(self) -> Iter {
        self.iter()
    }
}

/// Ascending iterator over the members of a [`NodeSet`].
#[derive(Clone)]
pub struct Iter(u64);

impl Iterator for Iter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let node = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(node)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let len = self.0.count_ones() as usize;
        (len, Some(len))
    }
}

impl ExactSizeIterator for Iter {}

/// All subsets of `universe` with at most `max_size` members, in ascending
/// order of their bitmask value.
pub fn subsets_up_to(universe: NodeSet, max_size: usize) -> alloc::vec::Vec<NodeSet> {
    let mut out = alloc::vec::Vec::new();
    // Submasks of `universe` in increasing order.
    let u = universe.0;
    let mut sub: u64 = 0;
    loop {
        if (sub.count_ones() as usize) <= max_size {
            out.push(NodeSet(sub));
        }
        if sub == u {
            break;
        }
        sub = (sub.wrapping_sub(u)) & u;
    }
    out
}
