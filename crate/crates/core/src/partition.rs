//! Labelled partitions: an ordered partition `[k1, .., km]` of the nodes
//! together with the assignment of node labels to its elements.
//!
//! Elements are stored left to right as [`NodeSet`]s, so the within-element
//! order is always ascending by label. Edges in a DAG belonging to a labelled
//! partition only point from right to left: a node may take parents from any
//! element to the right of its own, and must take at least one parent from the
//! element immediately to the right (unless it sits in the rightmost element).

use alloc::vec::Vec;

use crate::nodeset::{NodeSet, MAX_NODES};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PartitionError {
    #[error("partition has no elements")]
    Empty,
    #[error("partition element {0} is empty")]
    EmptyElement(usize),
    #[error("node {0} appears in more than one element")]
    Duplicate(usize),
    #[error("nodes {missing:?} are not covered by any element")]
    Uncovered { missing: NodeSet },
    #[error("node {node} out of range for {n} nodes")]
    OutOfRange { node: usize, n: usize },
    #[error("lambda sums to {sum} but the permutation has {len} entries")]
    LengthMismatch { sum: usize, len: usize },
}

/// Parent-set constraints a labelled partition places on one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NodeConstraint {
    /// Nodes that may not be parents: the node's own element and everything to its left.
    pub banned: NodeSet,
    /// At least one parent must come from here (empty for the rightmost element).
    pub required: NodeSet,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelledPartition {
    n: usize,
    elements: Vec<NodeSet>,
}

impl core::fmt::Debug for LabelledPartition {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_list().entries(self.elements.iter()).finish()
    }
}

impl LabelledPartition {
    /// Builds a labelled partition of `0..n` from its elements, left to right.
    pub fn new(n: usize, elements: Vec<NodeSet>) -> Result<Self, PartitionError> {
        if n > MAX_NODES {
            return Err(PartitionError::OutOfRange { node: n, n: MAX_NODES });
        }
        if elements.is_empty() && n > 0 {
            return Err(PartitionError::Empty);
        }
        let full = NodeSet::full(n);
        let mut seen = NodeSet::EMPTY;
        for (idx, &el) in elements.iter().enumerate() {
            if el.is_empty() {
                return Err(PartitionError::EmptyElement(idx));
            }
            if let Some(node) = el.difference(full).first() {
                return Err(PartitionError::OutOfRange { node, n });
            }
            if let Some(node) = el.intersection(seen).first() {
                return Err(PartitionError::Duplicate(node));
            }
            seen = seen.union(el);
        }
        if seen != full {
            return Err(PartitionError::Uncovered { missing: full.difference(seen) });
        }
        Ok(Self { n, elements })
    }

    pub(crate) fn from_elements_unchecked(n: usize, elements: Vec<NodeSet>) -> Self {
        debug_assert!(Self::new(n, elements.clone()).is_ok());
        Self { n, elements }
    }

    /// Builds the partition whose element sizes are `lambda`, filled with the
    /// node labels of `permutation` from left to right.
    pub fn from_lambda(lambda: &[usize], permutation: &[usize]) -> Result<Self, PartitionError> {
        let sum: usize = lambda.iter().sum();
        if sum != permutation.len() {
            return Err(PartitionError::LengthMismatch { sum, len: permutation.len() });
        }
        let n = permutation.len();
        let mut elements = Vec::with_capacity(lambda.len());
        let mut pos = 0;
        for (idx, &k) in lambda.iter().enumerate() {
            if k == 0 {
                return Err(PartitionError::EmptyElement(idx));
            }
            let mut el = NodeSet::EMPTY;
            for &node in &permutation[pos..pos + k] {
                if node >= n {
                    return Err(PartitionError::OutOfRange { node, n });
                }
                el.insert(node);
            }
            elements.push(el);
            pos += k;
        }
        Self::new(n, elements)
    }

    /// The single-element partition `[n]`; its only DAG is the empty graph.
    pub fn single(n: usize) -> Self {
        Self { n, elements: if n == 0 { Vec::new() } else { alloc::vec![NodeSet::full(n)] } }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of elements `m`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[NodeSet] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<NodeSet> {
        self.elements
    }

    /// Element sizes `[k1, .., km]`.
    pub fn lambda(&self) -> Vec<usize> {
        self.elements.iter().map(|e| e.len()).collect()
    }

    /// The representative permutation: labels of each element ascending, left to right.
    pub fn permutation(&self) -> Vec<usize> {
        self.elements.iter().flat_map(|e| e.iter()).collect()
    }

    /// Index of the element containing `node`.
    pub fn element_of(&self, node: usize) -> usize {
        self.elements
            .iter()
            .position(|e| e.contains(node))
            .expect("node belongs to the partition")
    }

    /// Per-node parent-set constraints, indexed by node label.
    pub fn constraints(&self) -> Vec<NodeConstraint> {
        let mut out = alloc::vec![NodeConstraint::default(); self.n];
        let mut prefix = NodeSet::EMPTY;
        for (idx, &el) in self.elements.iter().enumerate() {
            prefix = prefix.union(el);
            let required = self.elements.get(idx + 1).copied().unwrap_or(NodeSet::EMPTY);
            for node in el {
                out[node] = NodeConstraint { banned: prefix, required };
            }
        }
        out
    }

    /// True when `parents` (indexed by node) is consistent with this partition.
    pub fn admits(&self, parents: &[NodeSet]) -> bool {
        parents.len() == self.n
            && self.constraints().iter().zip(parents).all(|(c, &pa)| {
                !pa.intersects(c.banned) && (c.required.is_empty() || pa.intersects(c.required))
            })
    }
}

/// Nodes whose constraints differ between two labelled partitions of the same nodes.
pub fn changed_nodes(before: &[NodeConstraint], after: &[NodeConstraint]) -> NodeSet {
    before
        .iter()
        .zip(after)
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(node, _)| node)
        .collect()
}
