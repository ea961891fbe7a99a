//! The edge reversal move that resamples both endpoint parent sets in
//! proportion to their scores.
//!
//! For a chosen edge `a -> b` both endpoints are orphaned. Node `a` then draws
//! a parent set containing `b` and avoiding its own descendants; afterwards `b`
//! draws any parent set avoiding its descendants in the updated graph. The
//! Metropolis–Hastings ratio reduces to
//! `|E| z_a z_b / (|E'| z'_b z'_a)`, where the `z` are the normalisers of the
//! forward draws and the `z'` those of the mirrored backward draws.

use alloc::vec::Vec;

use rand::Rng;

use crate::graph::{descendants_of, outpoint_decomposition, Dag, Edge};
use crate::logmath::{accept, log};
use crate::nodeset::NodeSet;
use crate::partition::LabelledPartition;
use crate::partition_mcmc::sample_dag_from_partition;
use crate::scoring::ScoreTable;

/// A proposed reversal with every normaliser needed for its acceptance ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct RevProposal {
    /// The edge `a -> b` of the current graph that was reversed.
    pub edge: Edge,
    pub proposed: Dag,
    pub log_forward_z1: f64,
    pub log_forward_z2: f64,
    pub log_backward_z1: f64,
    pub log_backward_z2: f64,
    pub edge_count_before: usize,
    pub edge_count_after: usize,
}

impl RevProposal {
    pub fn log_acceptance(&self) -> f64 {
        log(self.edge_count_before as f64) + self.log_forward_z1 + self.log_forward_z2
            - log(self.edge_count_after as f64)
            - self.log_backward_z1
            - self.log_backward_z2
    }
}

/// Result of one reversal attempt.
#[derive(Debug, Clone, PartialEq)]
pub struct RevOutcome {
    pub dag: Dag,
    pub accepted: bool,
    /// False when there was no edge to reverse.
    pub proposed: bool,
}

/// Parent sets with both endpoints of `edge` orphaned.
pub(crate) fn orphaned(dag: &Dag, edge: Edge) -> Vec<NodeSet> {
    let mut parents = dag.parent_sets().to_vec();
    parents[edge.from] = NodeSet::EMPTY;
    parents[edge.to] = NodeSet::EMPTY;
    parents
}

/// Constraints of the first draw: `a` must take `b` and avoid its descendants.
pub(crate) fn first_draw(orphan: &[NodeSet], edge: Edge) -> (NodeSet, NodeSet) {
    (descendants_of(orphan, edge.from), NodeSet::singleton(edge.to))
}

/// Normalisers of the backward move that would restore `original` from a
/// proposal reversing `edge`.
pub(crate) fn backward_normalisers(
    table: &ScoreTable,
    original: &Dag,
    orphan: &[NodeSet],
    edge: Edge,
) -> (f64, f64) {
    let (a, b) = (edge.from, edge.to);
    let back_first = descendants_of(orphan, b);
    let z1 = table
        .log_sum(b, back_first, NodeSet::singleton(a))
        .expect("the original parent set of b is admissible");
    let mut restored = orphan.to_vec();
    restored[b] = original.parents(b);
    let back_second = descendants_of(&restored, a);
    let z2 = table
        .log_sum(a, back_second, NodeSet::EMPTY)
        .expect("the original parent set of a is admissible");
    (z1, z2)
}

/// Builds a reversal proposal for a specific edge. `None` if `a` has no admissible
/// parent set containing `b` (parent limit zero).
pub fn propose_for_edge<R: Rng + ?Sized>(
    dag: &Dag,
    table: &ScoreTable,
    edge: Edge,
    rng: &mut R,
) -> Option<RevProposal> {
    let (a, b) = (edge.from, edge.to);
    let orphan = orphaned(dag, edge);
    let (banned_a, required_a) = first_draw(&orphan, edge);
    let z1 = table.log_sum(a, banned_a, required_a)?;
    let new_a = table.sample_with_total(a, banned_a, required_a, z1, rng)?;
    let mut parents = orphan.clone();
    parents[a] = new_a;
    let banned_b = descendants_of(&parents, b);
    let z2 = table.log_sum(b, banned_b, NodeSet::EMPTY)?;
    let new_b = table.sample_with_total(b, banned_b, NodeSet::EMPTY, z2, rng)?;
    parents[b] = new_b;
    let proposed = Dag::from_parents_unchecked(parents);
    let (bz1, bz2) = backward_normalisers(table, dag, &orphan, edge);
    Some(RevProposal {
        edge,
        edge_count_before: dag.edge_count(),
        edge_count_after: proposed.edge_count(),
        proposed,
        log_forward_z1: z1,
        log_forward_z2: z2,
        log_backward_z1: bz1,
        log_backward_z2: bz2,
    })
}

/// Picks an edge uniformly and builds its reversal proposal.
pub fn propose_rev<R: Rng + ?Sized>(dag: &Dag, table: &ScoreTable, rng: &mut R) -> Option<RevProposal> {
    let count = dag.edge_count();
    if count == 0 {
        return None;
    }
    let edge = dag.edges().nth(rng.random_range(0..count)).expect("index below edge count");
    propose_for_edge(dag, table, edge, rng)
}

/// One Metropolis–Hastings step of the edge reversal move.
pub fn rev_step<R: Rng + ?Sized>(state: &Dag, table: &ScoreTable, rng: &mut R) -> RevOutcome {
    match propose_rev(state, table, rng) {
        None => RevOutcome { dag: state.clone(), accepted: false, proposed: false },
        Some(p) => {
            if accept(p.log_acceptance(), rng) {
                RevOutcome { dag: p.proposed, accepted: true, proposed: true }
            } else {
                RevOutcome { dag: state.clone(), accepted: false, proposed: true }
            }
        }
    }
}

/// Edge reversal inside partition MCMC: draw a DAG from the partition, try the
/// reversal, and map an accepted DAG back to its labelled partition.
pub fn rev_partition_step<R: Rng + ?Sized>(
    part: &LabelledPartition,
    table: &ScoreTable,
    rng: &mut R,
) -> (LabelledPartition, RevOutcome) {
    let dag = sample_dag_from_partition(part, table, rng);
    let outcome = rev_step(&dag, table, rng);
    let next = if outcome.accepted { outpoint_decomposition(&outcome.dag) } else { part.clone() };
    (next, outcome)
}
