//! DAG representation, ancestor/descendant closures, outpoint decomposition and
//! single-edge neighbourhoods.
//!
//! Row `i` of the adjacency matrix lists the parents of node `i`; an entry
//! `(i, j) = 1` is the edge `j -> i`. Internally each row is a [`NodeSet`].

use alloc::vec::Vec;

use crate::nodeset::{NodeSet, MAX_NODES};
use crate::partition::LabelledPartition;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("adjacency matrix is not square (row {row} has {len} entries, expected {n})")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("graph contains a directed cycle")]
    Cycle,
    #[error("{0} nodes exceed the supported maximum of 64")]
    TooManyNodes(usize),
    #[error("node {node} out of range for {n} nodes")]
    OutOfRange { node: usize, n: usize },
}

/// A directed edge `from -> to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
}

impl Edge {
    pub const fn new(from: usize, to: usize) -> Self {
        Edge { from, to }
    }
}

/// A directed acyclic graph on nodes `0..n`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dag {
    parents: Vec<NodeSet>,
}

impl core::fmt::Debug for Dag {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_map().entries(self.parents.iter().enumerate()).finish()
    }
}

/// True iff the parent sets describe a graph without directed cycles.
pub(crate) fn parents_acyclic(parents: &[NodeSet]) -> bool {
    let mut remaining = NodeSet::full(parents.len());
    while !remaining.is_empty() {
        let sources: NodeSet = remaining
            .iter()
            .filter(|&v| !parents[v].intersects(remaining))
            .collect();
        if sources.is_empty() {
            return false;
        }
        remaining = remaining.difference(sources);
    }
    true
}

/// Checks a square 0/1 adjacency matrix (row `i` = parents of `i`) for cycles.
pub fn is_acyclic<T: AsRef<[bool]>>(adjacency: &[T]) -> Result<bool, GraphError> {
    let parents = rows_to_parents(adjacency)?;
    Ok(parents_acyclic(&parents))
}

fn rows_to_parents<T: AsRef<[bool]>>(adjacency: &[T]) -> Result<Vec<NodeSet>, GraphError> {
    let n = adjacency.len();
    if n > MAX_NODES {
        return Err(GraphError::TooManyNodes(n));
    }
    let mut parents = Vec::with_capacity(n);
    for (i, row) in adjacency.iter().enumerate() {
        let row = row.as_ref();
        if row.len() != n {
            return Err(GraphError::NotSquare { row: i, len: row.len(), n });
        }
        if row[i] {
            return Err(GraphError::SelfLoop(i));
        }
        parents.push(row.iter().enumerate().filter(|(_, &b)| b).map(|(j, _)| j).collect());
    }
    Ok(parents)
}

impl Dag {
    pub fn empty(n: usize) -> Self {
        assert!(n <= MAX_NODES, "at most 64 nodes are supported");
        Dag { parents: alloc::vec![NodeSet::EMPTY; n] }
    }

    /// Builds a DAG from per-node parent sets, rejecting self-loops and cycles.
    pub fn from_parents(parents: Vec<NodeSet>) -> Result<Self, GraphError> {
        let n = parents.len();
        if n > MAX_NODES {
            return Err(GraphError::TooManyNodes(n));
        }
        let full = NodeSet::full(n);
        for (i, &pa) in parents.iter().enumerate() {
            if pa.contains(i) {
                return Err(GraphError::SelfLoop(i));
            }
            if let Some(node) = pa.difference(full).first() {
                return Err(GraphError::OutOfRange { node, n });
            }
        }
        if !parents_acyclic(&parents) {
            return Err(GraphError::Cycle);
        }
        Ok(Dag { parents })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if n > MAX_NODES {
            return Err(GraphError::TooManyNodes(n));
        }
        let mut parents = alloc::vec![NodeSet::EMPTY; n];
        for &(from, to) in edges {
            for node in [from, to] {
                if node >= n {
                    return Err(GraphError::OutOfRange { node, n });
                }
            }
            parents[to].insert(from);
        }
        Self::from_parents(parents)
    }

    pub fn from_adjacency<T: AsRef<[bool]>>(adjacency: &[T]) -> Result<Self, GraphError> {
        Self::from_parents(rows_to_parents(adjacency)?)
    }

    pub(crate) fn from_parents_unchecked(parents: Vec<NodeSet>) -> Self {
        debug_assert!(parents_acyclic(&parents));
        Dag { parents }
    }

    pub fn n(&self) -> usize {
        self.parents.len()
    }

    pub fn parents(&self, node: usize) -> NodeSet {
        self.parents[node]
    }

    pub fn parent_sets(&self) -> &[NodeSet] {
        &self.parents
    }

    pub fn children(&self, node: usize) -> NodeSet {
        (0..self.n()).filter(|&c| self.parents[c].contains(node)).collect()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.parents[to].contains(from)
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(|p| p.len()).sum()
    }

    pub fn max_in_degree(&self) -> usize {
        self.parents.iter().map(|p| p.len()).max().unwrap_or(0)
    }

    /// Edges ordered by child, then parent.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.parents
            .iter()
            .enumerate()
            .flat_map(|(to, pa)| pa.iter().map(move |from| Edge { from, to }))
    }

    /// The adjacency matrix, row `i` holding the parents of `i`.
    pub fn adjacency(&self) -> Vec<Vec<bool>> {
        let n = self.n();
        self.parents
            .iter()
            .map(|pa| (0..n).map(|j| pa.contains(j)).collect())
            .collect()
    }

    /// Replaces the parent set of one node. Fails if that would create a cycle.
    pub fn with_parents(&self, node: usize, parents: NodeSet) -> Result<Self, GraphError> {
        let mut next = self.parents.clone();
        next[node] = parents;
        Self::from_parents(next)
    }

    /// A topological order, sources first.
    pub fn topological_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.n());
        let mut placed = NodeSet::EMPTY;
        while order.len() < self.n() {
            for v in NodeSet::full(self.n()).difference(placed) {
                if self.parents[v].is_subset(placed) {
                    order.push(v);
                }
            }
            placed = order.iter().copied().collect();
        }
        order
    }

    pub fn apply(&self, mv: StructureMove) -> Dag {
        let mut parents = self.parents.clone();
        match mv {
            StructureMove::Stay => {}
            StructureMove::Add(e) => parents[e.to].insert(e.from),
            StructureMove::Delete(e) => parents[e.to].remove(e.from),
            StructureMove::Reverse(e) => {
                parents[e.to].remove(e.from);
                parents[e.from].insert(e.to);
            }
        }
        Dag::from_parents_unchecked(parents)
    }
}

/// Row `i` holds the ancestors of node `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AncestorMatrix {
    rows: Vec<NodeSet>,
}

impl AncestorMatrix {
    pub fn ancestors(&self, node: usize) -> NodeSet {
        self.rows[node]
    }

    pub fn rows(&self) -> &[NodeSet] {
        &self.rows
    }

    pub fn is_ancestor(&self, candidate: usize, of: usize) -> bool {
        self.rows[of].contains(candidate)
    }

    pub fn descendants(&self) -> DescendantMatrix {
        DescendantMatrix { rows: transpose(&self.rows) }
    }

    /// Updates the closure after `edge` was added to the graph.
    pub fn add_edge(&mut self, edge: Edge) {
        let gained = self.rows[edge.from].with(edge.from);
        for v in 0..self.rows.len() {
            if v == edge.to || self.rows[v].contains(edge.to) {
                self.rows[v] = self.rows[v].union(gained);
            }
        }
    }

    /// Updates the closure after `edge` was removed; `dag` is the graph after removal.
    /// Only `edge.to` and its descendants are recomputed.
    pub fn remove_edge(&mut self, dag: &Dag, edge: Edge) {
        let affected: NodeSet = (0..self.rows.len())
            .filter(|&v| v == edge.to || self.rows[v].contains(edge.to))
            .collect();
        for v in dag.topological_order() {
            if affected.contains(v) {
                self.rows[v] = closure_row(dag, &self.rows, v);
            }
        }
    }

    /// Updates the closure after an arbitrary single-edge move; `dag` is the graph after it.
    pub fn apply_move(&mut self, dag: &Dag, mv: StructureMove) {
        match mv {
            StructureMove::Stay => {}
            StructureMove::Add(e) => self.add_edge(e),
            StructureMove::Delete(e) => self.remove_edge(dag, e),
            StructureMove::Reverse(e) => {
                // Remove first, using the intermediate graph, then add the flipped edge.
                let mut mid = dag.parent_sets().to_vec();
                mid[e.from].remove(e.to);
                self.remove_edge(&Dag::from_parents_unchecked(mid), e);
                self.add_edge(Edge::new(e.to, e.from));
            }
        }
    }
}

fn closure_row(dag: &Dag, rows: &[NodeSet], v: usize) -> NodeSet {
    dag.parents(v)
        .iter()
        .fold(dag.parents(v), |acc, p| acc.union(rows[p]))
}

fn transpose(rows: &[NodeSet]) -> Vec<NodeSet> {
    let n = rows.len();
    let mut out = alloc::vec![NodeSet::EMPTY; n];
    for (i, row) in rows.iter().enumerate() {
        for j in row.iter() {
            out[j].insert(i);
        }
    }
    out
}

/// Transitive closure of the parent relation.
pub fn ancestor_matrix(dag: &Dag) -> AncestorMatrix {
    let mut rows = alloc::vec![NodeSet::EMPTY; dag.n()];
    for v in dag.topological_order() {
        rows[v] = closure_row(dag, &rows, v);
    }
    AncestorMatrix { rows }
}

/// Row `i` holds the descendants of node `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescendantMatrix {
    rows: Vec<NodeSet>,
}

impl DescendantMatrix {
    pub fn descendants(&self, node: usize) -> NodeSet {
        self.rows[node]
    }

    pub fn rows(&self) -> &[NodeSet] {
        &self.rows
    }

    pub fn ancestors(&self) -> AncestorMatrix {
        AncestorMatrix { rows: transpose(&self.rows) }
    }
}

pub fn descendant_matrix(dag: &Dag) -> DescendantMatrix {
    ancestor_matrix(dag).descendants()
}

/// Descendants of `node` only, without building the full matrix.
pub(crate) fn descendants_of(parents: &[NodeSet], node: usize) -> NodeSet {
    let mut found = NodeSet::EMPTY;
    let mut frontier = NodeSet::singleton(node);
    while !frontier.is_empty() {
        let next: NodeSet = (0..parents.len())
            .filter(|&c| !found.contains(c) && parents[c].intersects(frontier))
            .collect();
        found = found.union(next);
        frontier = next;
    }
    found
}

/// Groups nodes by the round in which they become outpoints when sources are
/// repeatedly stripped. The last-removed group is the leftmost element.
pub fn outpoint_decomposition(dag: &Dag) -> LabelledPartition {
    let n = dag.n();
    let mut remaining = NodeSet::full(n);
    let mut rounds = Vec::new();
    while !remaining.is_empty() {
        let outpoints: NodeSet = remaining
            .iter()
            .filter(|&v| !dag.parents(v).intersects(remaining))
            .collect();
        rounds.push(outpoints);
        remaining = remaining.difference(outpoints);
    }
    rounds.reverse();
    LabelledPartition::from_elements_unchecked(n, rounds)
}

/// One single-edge change, or staying put.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StructureMove {
    Stay,
    Add(Edge),
    Delete(Edge),
    Reverse(Edge),
}

/// Which single-edge changes count as neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeighborhoodRules {
    /// In-degree limit; moves that would exceed it are excluded.
    pub max_parents: usize,
    pub include_reversals: bool,
}

impl NeighborhoodRules {
    pub fn unrestricted(n: usize) -> Self {
        NeighborhoodRules { max_parents: n.saturating_sub(1), include_reversals: true }
    }
}

/// All DAGs one edge addition, deletion or reversal away, plus the graph itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureNeighborhood {
    pub deletions: Vec<Edge>,
    pub additions: Vec<Edge>,
    pub reversals: Vec<Edge>,
}

impl StructureNeighborhood {
    pub fn new(dag: &Dag, ancestors: &AncestorMatrix, rules: NeighborhoodRules) -> Self {
        let n = dag.n();
        let deletions: Vec<Edge> = dag.edges().collect();
        let mut additions = Vec::new();
        for to in 0..n {
            if dag.parents(to).len() >= rules.max_parents {
                continue;
            }
            for from in 0..n {
                // `to` must not already reach `from`, or the new edge closes a cycle.
                if from != to && !dag.has_edge(from, to) && !ancestors.is_ancestor(to, from) {
                    additions.push(Edge::new(from, to));
                }
            }
        }
        let mut reversals = Vec::new();
        if rules.include_reversals {
            for to in 0..n {
                // Ancestors of `to` reachable through some parent: flipping an edge
                // from any of them would leave a second path and close a cycle.
                let indirect = dag
                    .parents(to)
                    .iter()
                    .fold(NodeSet::EMPTY, |acc, p| acc.union(ancestors.ancestors(p)));
                for from in dag.parents(to).difference(indirect) {
                    if dag.parents(from).len() < rules.max_parents {
                        reversals.push(Edge::new(from, to));
                    }
                }
            }
        }
        StructureNeighborhood { deletions, additions, reversals }
    }

    /// Neighbourhood size including the self-move.
    pub fn size(&self) -> usize {
        self.deletions.len() + self.additions.len() + self.reversals.len() + 1
    }

    /// The `index`-th move in a fixed enumeration: self, deletions, additions, reversals.
    pub fn get(&self, index: usize) -> Option<StructureMove> {
        let mut i = index;
        if i == 0 {
            return Some(StructureMove::Stay);
        }
        i -= 1;
        if i < self.deletions.len() {
            return Some(StructureMove::Delete(self.deletions[i]));
        }
        i -= self.deletions.len();
        if i < self.additions.len() {
            return Some(StructureMove::Add(self.additions[i]));
        }
        i -= self.additions.len();
        self.reversals.get(i).map(|&e| StructureMove::Reverse(e))
    }

    pub fn moves(&self) -> impl Iterator<Item = StructureMove> + '_ {
        (0..self.size()).map(move |i| self.get(i).expect("index within size"))
    }
}

/// The unrestricted neighbourhood (no in-degree limit, reversals included).
pub fn structure_neighborhood(dag: &Dag) -> StructureNeighborhood {
    StructureNeighborhood::new(dag, &ancestor_matrix(dag), NeighborhoodRules::unrestricted(dag.n()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn set(nodes: &[usize]) -> NodeSet {
        nodes.iter().copied().collect()
    }

    #[test]
    fn acyclicity_examples() {
        let empty = vec![vec![false; 3]; 3];
        assert_eq!(is_acyclic(&empty), Ok(true));
        let chain = Dag::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(is_acyclic(&chain.adjacency()), Ok(true));
        let two_cycle = vec![vec![false, true], vec![true, false]];
        assert_eq!(is_acyclic(&two_cycle), Ok(false));
    }

    #[test]
    fn acyclicity_rejects_malformed_input() {
        let ragged = vec![vec![false, false], vec![false]];
        assert!(matches!(is_acyclic(&ragged), Err(GraphError::NotSquare { .. })));
        let looped = vec![vec![true]];
        assert_eq!(is_acyclic(&looped), Err(GraphError::SelfLoop(0)));
        assert_eq!(Dag::from_edges(2, &[(0, 1), (1, 0)]), Err(GraphError::Cycle));
    }

    #[test]
    fn chain_ancestors() {
        let chain = Dag::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let anc = ancestor_matrix(&chain);
        assert_eq!(anc.ancestors(2), set(&[0, 1]));
        assert_eq!(anc.ancestors(1), set(&[0]));
        assert!(anc.ancestors(0).is_empty());
        assert_eq!(descendant_matrix(&chain).descendants(0), set(&[1, 2]));
        assert_eq!(ancestor_matrix(&Dag::empty(4)).rows(), &[NodeSet::EMPTY; 4]);
    }

    #[test]
    fn decomposition_examples() {
        assert_eq!(outpoint_decomposition(&Dag::empty(5)).lambda(), vec![5]);

        let chain = Dag::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let p = outpoint_decomposition(&chain);
        assert_eq!(p.elements(), &[set(&[2]), set(&[1]), set(&[0])]);

        // 4->2, 1->4, 3->4, 5->4, 1->2 in 1-based labels.
        let g = Dag::from_edges(5, &[(3, 1), (0, 3), (2, 3), (4, 3), (0, 1)]).unwrap();
        let p = outpoint_decomposition(&g);
        assert_eq!(p.lambda(), vec![1, 1, 3]);
        assert_eq!(p.elements(), &[set(&[1]), set(&[3]), set(&[0, 2, 4])]);
        assert!(p.admits(g.parent_sets()));
    }

    #[test]
    fn neighborhood_examples() {
        let nb = structure_neighborhood(&Dag::empty(3));
        assert_eq!((nb.deletions.len(), nb.additions.len(), nb.reversals.len()), (0, 6, 0));
        assert_eq!(nb.size(), 7);

        let full = Dag::from_edges(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let nb = structure_neighborhood(&full);
        assert_eq!(nb.deletions.len(), 3);
        assert!(nb.additions.is_empty());
        let mut rev = nb.reversals.clone();
        rev.sort();
        assert_eq!(rev, vec![Edge::new(0, 1), Edge::new(1, 2)]);
        assert_eq!(nb.size(), 6);
    }

    #[test]
    fn in_degree_limit_trims_moves() {
        let g = Dag::from_edges(3, &[(0, 2)]).unwrap();
        let rules = NeighborhoodRules { max_parents: 1, include_reversals: true };
        let nb = StructureNeighborhood::new(&g, &ancestor_matrix(&g), rules);
        assert!(nb.additions.iter().all(|e| e.to != 2));
        assert_eq!(nb.reversals, vec![Edge::new(0, 2)]);
        let rules = NeighborhoodRules { max_parents: 1, include_reversals: false };
        assert!(StructureNeighborhood::new(&g, &ancestor_matrix(&g), rules).reversals.is_empty());
    }

    #[test]
    fn topological_order_respects_edges() {
        let g = Dag::from_edges(4, &[(3, 0), (0, 1), (2, 1)]).unwrap();
        let order = g.topological_order();
        let pos = |v: usize| order.iter().position(|&x| x == v).unwrap();
        assert!(g.edges().all(|e| pos(e.from) < pos(e.to)));
    }
}
