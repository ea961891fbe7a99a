//! Order MCMC: Metropolis–Hastings over node permutations.
//!
//! Position 0 is leftmost and a node may only take parents from later
//! positions. The order score sums, over nodes, the score mass of all
//! permissible parent sets. Sampled DAGs are weighted by the number of orders
//! they are consistent with; this bias is intended and not corrected.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::chain::{ChainConfig, ChainError, ChainTrace, MoveKind};
use crate::graph::Dag;
use crate::large_move_weight;
use crate::logmath::accept;
use crate::nodeset::NodeSet;
use crate::scoring::ScoreTable;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeOrder {
    nodes: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("not a permutation of 0..{n}")]
pub struct OrderError {
    pub n: usize,
}

impl NodeOrder {
    /// `nodes[p]` is the node at position `p`.
    pub fn new(nodes: Vec<usize>) -> Result<Self, OrderError> {
        let n = nodes.len();
        let mut seen = NodeSet::EMPTY;
        for &v in &nodes {
            if v >= n || n > crate::nodeset::MAX_NODES || seen.contains(v) {
                return Err(OrderError { n });
            }
            seen.insert(v);
        }
        Ok(NodeOrder { nodes })
    }

    pub fn identity(n: usize) -> Self {
        NodeOrder { nodes: (0..n).collect() }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut nodes: Vec<usize> = (0..n).collect();
        nodes.shuffle(rng);
        NodeOrder { nodes }
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.nodes
    }

    pub fn node_at(&self, position: usize) -> usize {
        self.nodes[position]
    }

    pub fn position_of(&self, node: usize) -> usize {
        self.nodes.iter().position(|&v| v == node).expect("node in order")
    }

    /// Nodes a node at `position` may not take as parents: itself and everything to its left.
    pub fn banned_at(&self, position: usize) -> NodeSet {
        self.nodes[..=position].iter().copied().collect()
    }

    /// True if every parent of every node sits further right.
    pub fn admits(&self, dag: &Dag) -> bool {
        (0..self.n()).all(|p| !dag.parents(self.nodes[p]).intersects(self.banned_at(p)))
    }

    pub fn swap(&mut self, p: usize, q: usize) {
        self.nodes.swap(p, q);
    }
}

/// Per-position log score sums of an order.
pub fn order_node_sums(order: &NodeOrder, table: &ScoreTable) -> Vec<f64> {
    let mut banned = NodeSet::EMPTY;
    order
        .as_slice()
        .iter()
        .map(|&v| {
            banned.insert(v);
            table.log_sum(v, banned, NodeSet::EMPTY).expect("the empty parent set is always admissible")
        })
        .collect()
}

pub fn order_log_score(order: &NodeOrder, table: &ScoreTable) -> f64 {
    order_node_sums(order, table).iter().sum()
}

/// A swap of two positions `first < second`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderMove {
    pub first: usize,
    pub second: usize,
    pub kind: MoveKind,
}

impl OrderMove {
    /// Positions whose banned sets change.
    pub fn rescored_positions(&self) -> core::ops::RangeInclusive<usize> {
        self.first..=self.second
    }

    /// Nodes whose banned sets change when applied to `order`.
    pub fn rescored_nodes(&self, order: &NodeOrder) -> NodeSet {
        self.rescored_positions().map(|p| order.node_at(p)).collect()
    }
}

/// Draws a swap: two arbitrary positions with probability
/// [`large_move_weight`], otherwise an adjacent pair. `None` when `n < 2`.
pub fn propose_order_move<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Option<OrderMove> {
    if n < 2 {
        return None;
    }
    if rng.random::<f64>() < large_move_weight(n) {
        let p = rng.random_range(0..n);
        let mut q = rng.random_range(0..n - 1);
        if q >= p {
            q += 1;
        }
        Some(OrderMove { first: p.min(q), second: p.max(q), kind: MoveKind::OrderGlobalSwap })
    } else {
        let p = rng.random_range(0..n - 1);
        Some(OrderMove { first: p, second: p + 1, kind: MoveKind::OrderAdjacentSwap })
    }
}

/// Draws each node's parents in proportion to score among sets to its right.
pub fn sample_dag_from_order<R: Rng + ?Sized>(order: &NodeOrder, table: &ScoreTable, rng: &mut R) -> Dag {
    let mut parents = alloc::vec![NodeSet::EMPTY; order.n()];
    let mut banned = NodeSet::EMPTY;
    for &v in order.as_slice() {
        banned.insert(v);
        parents[v] = table.sample(v, banned, NodeSet::EMPTY, rng).expect("the empty parent set is always admissible");
    }
    Dag::from_parents_unchecked(parents)
}

/// Order chain state with cached per-position sums.
#[derive(Debug, Clone)]
pub struct OrderChain<'a> {
    table: &'a ScoreTable,
    order: NodeOrder,
    sums: Vec<f64>,
    score: f64,
}

impl<'a> OrderChain<'a> {
    pub fn new(order: NodeOrder, table: &'a ScoreTable) -> Self {
        let sums = order_node_sums(&order, table);
        let score = sums.iter().sum();
        OrderChain { table, order, sums, score }
    }

    pub fn order(&self) -> &NodeOrder {
        &self.order
    }

    pub fn log_score(&self) -> f64 {
        self.score
    }

    /// One transition; returns the move kind and whether it was accepted.
    pub fn step<R: Rng + ?Sized>(&mut self, config: &ChainConfig, rng: &mut R) -> (MoveKind, bool, u64) {
        if rng.random::<f64>() < config.stay_still_prob {
            return (MoveKind::Stay, true, 0);
        }
        let Some(mv) = propose_order_move(self.order.n(), rng) else {
            return (MoveKind::Stay, true, 0);
        };
        let mut proposed = self.order.clone();
        proposed.swap(mv.first, mv.second);
        let mut banned = proposed.banned_at(mv.first).without(proposed.node_at(mv.first));
        let mut new_sums = Vec::with_capacity(mv.second - mv.first + 1);
        for p in mv.rescored_positions() {
            let v = proposed.node_at(p);
            banned.insert(v);
            new_sums.push(self.table.log_sum(v, banned, NodeSet::EMPTY).expect("empty set admissible"));
        }
        let old: f64 = self.sums[mv.rescored_positions()].iter().sum();
        let new: f64 = new_sums.iter().sum();
        let rescored = new_sums.len() as u64;
        if accept(new - old, rng) {
            self.order = proposed;
            self.sums[mv.rescored_positions()].copy_from_slice(&new_sums);
            self.score = self.sums.iter().sum();
            (mv.kind, true, rescored)
        } else {
            (mv.kind, false, rescored)
        }
    }
}

/// Runs order MCMC; each recorded step also draws a DAG from the current order.
pub fn run_order_chain<R: Rng + ?Sized>(
    init: NodeOrder,
    table: &ScoreTable,
    config: &ChainConfig,
    rng: &mut R,
) -> Result<ChainTrace, ChainError> {
    config.validate()?;
    if init.n() != table.n() {
        return Err(ChainError::Config("initial order does not match the score table"));
    }
    let mut chain = OrderChain::new(init, table);
    let mut trace = ChainTrace::with_capacity(config);
    for step in 0..config.steps {
        if step > 0 {
            let (kind, accepted, rescored) = chain.step(config, rng);
            trace.stats.record(kind, accepted);
            trace.stats.rescored_nodes += rescored;
        }
        let score = chain.log_score();
        trace.record(step, config.thin, score, || {
            let dag = sample_dag_from_order(chain.order(), table, rng);
            let s = table.dag_log_score(&dag).expect("sampled within the table");
            (dag, s)
        });
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logmath::log;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_score_counts_compatible_dags() {
        // Order (3,1,2) with every entry scoring 1: 4 * 2 * 1 parent-set choices.
        let table = ScoreTable::from_fn(3, 2, |_, _| 0.0);
        let order = NodeOrder::new(alloc::vec![2, 0, 1]).unwrap();
        assert!((order_log_score(&order, &table) - log(8.0)).abs() < 1e-12);
    }

    #[test]
    fn invalid_orders_rejected() {
        assert!(NodeOrder::new(alloc::vec![0, 0, 1]).is_err());
        assert!(NodeOrder::new(alloc::vec![0, 3, 1]).is_err());
        assert!(NodeOrder::new(alloc::vec![1, 0]).is_ok());
    }

    #[test]
    fn last_node_has_no_parents() {
        let table = ScoreTable::from_fn(4, 3, |_, pa| pa.len() as f64);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let order = NodeOrder::new(alloc::vec![1, 3, 0, 2]).unwrap();
        for _ in 0..50 {
            let dag = sample_dag_from_order(&order, &table, &mut rng);
            assert!(dag.parents(2).is_empty());
            assert!(order.admits(&dag));
        }
    }

    #[test]
    fn adjacent_swap_rescores_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let mv = propose_order_move(14, &mut rng).unwrap();
            assert!(mv.first < mv.second && mv.second < 14);
            if mv.kind == MoveKind::OrderAdjacentSwap {
                assert_eq!(mv.second, mv.first + 1);
            }
        }
        assert!(propose_order_move(1, &mut rng).is_none());
    }

    #[test]
    fn cached_sums_track_fresh_score() {
        let table = ScoreTable::from_fn(5, 3, |n, pa| 0.2 * n as f64 + 0.37 * pa.bits() as f64 - pa.len() as f64);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut chain = OrderChain::new(NodeOrder::identity(5), &table);
        let config = ChainConfig::default();
        for _ in 0..500 {
            chain.step(&config, &mut rng);
            let fresh = order_log_score(chain.order(), &table);
            assert!((fresh - chain.log_score()).abs() < 1e-9);
        }
    }
}
