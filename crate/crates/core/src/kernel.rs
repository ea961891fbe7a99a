//! Exact one-step transition kernels of every move type, assembled by
//! enumerating proposals and their acceptance probabilities. Used to check
//! detailed balance and stationarity at small node counts.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::edge_reversal::{backward_normalisers, first_draw, orphaned};
use crate::graph::{ancestor_matrix, descendants_of, outpoint_decomposition, Dag, NeighborhoodRules, StructureNeighborhood};
use crate::large_move_weight;
use crate::logmath::{exp, log};
use crate::nodeset::NodeSet;
use crate::order::{order_log_score, NodeOrder};
use crate::partition::LabelledPartition;
use crate::partition_mcmc::{
    apply_relocation, basic_moves, basic_neighborhood_size, partition_log_score, relocation_log_hastings,
    relocation_moves, swap_moves,
};
use crate::scoring::ScoreTable;
use crate::structure::structure_log_acceptance;

/// One row of a kernel: destination states with probabilities (duplicates allowed).
pub type Row<S> = Vec<(S, f64)>;

fn accept_prob(log_ratio: f64) -> f64 {
    if log_ratio >= 0.0 {
        1.0
    } else {
        exp(log_ratio)
    }
}

/// Adds the leftover mass to staying at `state`.
fn close_row<S: Clone>(state: &S, mut row: Row<S>) -> Row<S> {
    let moved: f64 = row.iter().map(|(_, p)| p).sum();
    row.push((state.clone(), 1.0 - moved));
    row
}

/// Mixture of rows with the given weights.
pub fn mix<S>(parts: Vec<(f64, Row<S>)>) -> Row<S> {
    parts
        .into_iter()
        .flat_map(|(w, row)| row.into_iter().map(move |(s, p)| (s, w * p)))
        .collect()
}

/// Structure MCMC kernel row.
pub fn structure_row(dag: &Dag, table: &ScoreTable, rules: NeighborhoodRules) -> Row<Dag> {
    let nbd = StructureNeighborhood::new(dag, &ancestor_matrix(dag), rules);
    let q = 1.0 / nbd.size() as f64;
    let mut row = Vec::new();
    for mv in nbd.moves().skip(1) {
        let proposed = dag.apply(mv);
        let back = StructureNeighborhood::new(&proposed, &ancestor_matrix(&proposed), rules);
        let r = structure_log_acceptance(dag, &nbd, &proposed, &back, mv, table);
        row.push((proposed, q * accept_prob(r)));
    }
    close_row(dag, row)
}

/// Admissible parent sets with their draw probabilities.
fn draw_distribution(table: &ScoreTable, node: usize, banned: NodeSet, required: NodeSet) -> Option<(f64, Vec<(NodeSet, f64)>)> {
    let total = table.log_sum(node, banned, required)?;
    let sets = table
        .entries(node)
        .filter(|(m, _)| !m.intersects(banned) && (required.is_empty() || m.intersects(required)))
        .map(|(m, s)| (m, exp(s - total)))
        .collect();
    Some((total, sets))
}

/// Edge reversal kernel row.
pub fn rev_row(dag: &Dag, table: &ScoreTable) -> Row<Dag> {
    let edges: Vec<_> = dag.edges().collect();
    if edges.is_empty() {
        return alloc::vec![(dag.clone(), 1.0)];
    }
    let pick = 1.0 / edges.len() as f64;
    let mut row = Vec::new();
    for &edge in &edges {
        let (a, b) = (edge.from, edge.to);
        let orphan = orphaned(dag, edge);
        let (banned_a, required_a) = first_draw(&orphan, edge);
        let Some((z1, first)) = draw_distribution(table, a, banned_a, required_a) else {
            continue;
        };
        let (bz1, bz2) = backward_normalisers(table, dag, &orphan, edge);
        for (pa_a, p1) in first {
            let mut parents = orphan.clone();
            parents[a] = pa_a;
            let banned_b = descendants_of(&parents, b);
            let (z2, second) = draw_distribution(table, b, banned_b, NodeSet::EMPTY).expect("empty set admissible");
            for (pa_b, p2) in second {
                let mut next = parents.clone();
                next[b] = pa_b;
                let proposed = Dag::from_parents_unchecked(next);
                let r = log(edges.len() as f64) + z1 + z2 - log(proposed.edge_count() as f64) - bz1 - bz2;
                row.push((proposed, pick * p1 * p2 * accept_prob(r)));
            }
        }
    }
    close_row(dag, row)
}

/// Order MCMC kernel row (stay-still excluded): global swaps with weight `w`,
/// adjacent swaps otherwise.
pub fn order_row(order: &NodeOrder, table: &ScoreTable) -> Row<NodeOrder> {
    let n = order.n();
    if n < 2 {
        return alloc::vec![(order.clone(), 1.0)];
    }
    let w = large_move_weight(n);
    let here = order_log_score(order, table);
    let pairs = (n * (n - 1) / 2) as f64;
    let mut row = Vec::new();
    for p in 0..n {
        for q in p + 1..n {
            let mut next = order.clone();
            next.swap(p, q);
            let a = accept_prob(order_log_score(&next, table) - here);
            let mut prob = w / pairs;
            if q == p + 1 {
                prob += (1.0 - w) / (n - 1) as f64;
            }
            row.push((next, prob * a));
        }
    }
    close_row(order, row)
}

fn partition_row(
    part: &LabelledPartition,
    table: &ScoreTable,
    outcomes: Vec<(LabelledPartition, f64, f64)>,
) -> Row<LabelledPartition> {
    let here = partition_log_score(part, table);
    let row = outcomes
        .into_iter()
        .map(|(next, q, log_hastings)| {
            let there = partition_log_score(&next, table);
            let a = if there == f64::NEG_INFINITY { 0.0 } else { accept_prob(there - here + log_hastings) };
            (next, q * a)
        })
        .collect();
    close_row(part, row)
}

/// Basic split/join move kernel row.
pub fn basic_row(part: &LabelledPartition, table: &ScoreTable) -> Row<LabelledPartition> {
    let size = basic_neighborhood_size(&part.lambda()) as f64;
    let outcomes = basic_moves(part)
        .into_iter()
        .map(|next| {
            let back = basic_neighborhood_size(&next.lambda()) as f64;
            (next, 1.0 / size, log(size) - log(back))
        })
        .collect();
    partition_row(part, table, outcomes)
}

/// Node relocation kernel row.
pub fn relocation_row(part: &LabelledPartition, table: &ScoreTable) -> Row<LabelledPartition> {
    let moves = relocation_moves(part);
    let q = 1.0 / moves.len().max(1) as f64;
    let outcomes = moves
        .into_iter()
        .map(|(node, dest)| {
            let next = apply_relocation(part, node, dest);
            let h = relocation_log_hastings(part, &next);
            (next, q, h)
        })
        .collect();
    partition_row(part, table, outcomes)
}

/// Global or adjacent swap kernel row.
pub fn swap_row(part: &LabelledPartition, table: &ScoreTable, adjacent_only: bool) -> Row<LabelledPartition> {
    let moves = swap_moves(part, adjacent_only);
    let q = 1.0 / moves.len().max(1) as f64;
    partition_row(part, table, moves.into_iter().map(|next| (next, q, 0.0)).collect())
}

/// Every DAG of a labelled partition with its conditional probability given the partition.
pub fn dags_in_partition(part: &LabelledPartition, table: &ScoreTable) -> Vec<(Dag, f64)> {
    let mut out = alloc::vec![(alloc::vec![NodeSet::EMPTY; part.n()], 1.0)];
    for (node, c) in part.constraints().into_iter().enumerate() {
        let Some((_, sets)) = draw_distribution(table, node, c.banned, c.required) else {
            return Vec::new();
        };
        out = out
            .into_iter()
            .flat_map(|(parents, p)| {
                sets.iter().map(move |&(pa, q)| {
                    let mut next = parents.clone();
                    next[node] = pa;
                    (next, p * q)
                })
            })
            .collect();
    }
    out.into_iter().map(|(parents, p)| (Dag::from_parents_unchecked(parents), p)).collect()
}

/// Edge reversal through a DAG drawn from the partition, mapped back to partitions.
pub fn partition_rev_row(part: &LabelledPartition, table: &ScoreTable) -> Row<LabelledPartition> {
    dags_in_partition(part, table)
        .into_iter()
        .flat_map(|(dag, p)| {
            rev_row(&dag, table)
                .into_iter()
                .map(move |(next, q)| (outpoint_decomposition(&next), p * q))
        })
        .collect()
}

/// The full partition MCMC mixture used by the sampler, stay-still and edge
/// reversal included.
pub fn partition_mixture_row(
    part: &LabelledPartition,
    table: &ScoreTable,
    config: &crate::chain::ChainConfig,
) -> Row<LabelledPartition> {
    let w = large_move_weight(part.n());
    let main = 1.0 - config.stay_still_prob - config.p_rev;
    let pc = config.partition_move_prob;
    mix(alloc::vec![
        (config.stay_still_prob, alloc::vec![(part.clone(), 1.0)]),
        (config.p_rev, partition_rev_row(part, table)),
        (main * pc * w, relocation_row(part, table)),
        (main * pc * (1.0 - w), basic_row(part, table)),
        (main * (1.0 - pc) * w, swap_row(part, table, false)),
        (main * (1.0 - pc) * (1.0 - w), swap_row(part, table, true)),
    ])
}

/// A dense transition matrix over an explicit finite state list.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix<S> {
    pub states: Vec<S>,
    pub rows: Vec<Vec<f64>>,
}

impl<S: Ord + Clone> TransitionMatrix<S> {
    /// Assembles the matrix; `None` if some row leaves the state list.
    pub fn build(states: Vec<S>, mut row: impl FnMut(&S) -> Row<S>) -> Option<Self> {
        let index: BTreeMap<S, usize> = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let mut rows = Vec::with_capacity(states.len());
        for s in &states {
            let mut dense = alloc::vec![0.0; states.len()];
            for (next, p) in row(s) {
                dense[*index.get(&next)?] += p;
            }
            rows.push(dense);
        }
        Some(TransitionMatrix { states, rows })
    }

    pub fn probability(&self, from: usize, to: usize) -> f64 {
        self.rows[from][to]
    }

    /// Largest `|1 - sum of row|`.
    pub fn row_sum_error(&self) -> f64 {
        self.rows.iter().map(|r| (1.0 - r.iter().sum::<f64>()).abs()).fold(0.0, f64::max)
    }

    /// Largest `|pi_i K_ij - pi_j K_ji|`.
    pub fn detailed_balance_error(&self, pi: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.states.len() {
            for j in i + 1..self.states.len() {
                worst = worst.max((pi[i] * self.rows[i][j] - pi[j] * self.rows[j][i]).abs());
            }
        }
        worst
    }

    /// Total variation distance between `pi K` and `pi`.
    pub fn stationarity_error(&self, pi: &[f64]) -> f64 {
        let n = self.states.len();
        let mut next = alloc::vec![0.0; n];
        for (i, row) in self.rows.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                next[j] += pi[i] * p;
            }
        }
        0.5 * next.iter().zip(pi).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    /// States reachable from `start` in at most `steps` transitions with positive probability.
    pub fn reachable_within(&self, start: usize, steps: usize) -> Vec<bool> {
        let mut seen = alloc::vec![false; self.states.len()];
        seen[start] = true;
        let mut frontier = alloc::vec![start];
        for _ in 0..steps {
            let mut next = Vec::new();
            for &i in &frontier {
                for (j, &p) in self.rows[i].iter().enumerate() {
                    if p > 0.0 && !seen[j] {
                        seen[j] = true;
                        next.push(j);
                    }
                }
            }
            frontier = next;
        }
        seen
    }
}

/// Normalises log weights into a probability vector.
pub fn normalise(log_weights: &[f64]) -> Vec<f64> {
    let total = crate::logmath::log_sum_exp(log_weights);
    log_weights.iter().map(|l| exp(l - total)).collect()
}
