//! Annealed stochastic search over node orders for the highest-scoring DAG.
//!
//! Each order is scored by the best DAG consistent with it, the sum over nodes
//! of the best permissible parent-set score. Swaps are accepted with
//! probability `min(1, (Q'/Q)^gamma)` while `gamma` grows geometrically.
//! Repeating the search from random orders gives a confidence statement: if a
//! fraction `p*` of `Z` restarts finds the overall best, the chance that all
//! of them missed a better optimum is roughly `(1 - p*)^Z`.

use alloc::vec::Vec;

use rand::Rng;

use crate::graph::Dag;
use crate::logmath::accept;
use crate::nodeset::NodeSet;
use crate::oracle::{count_linear_extensions, MAX_LINEAR_EXTENSION_NODES};
use crate::order::{propose_order_move, NodeOrder};
use crate::scoring::ScoreTable;

/// Geometric schedule `gamma_t = gamma0 * rate^floor(t / block)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealSchedule {
    pub gamma0: f64,
    pub rate: f64,
    pub block: usize,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule { gamma0: 1.0, rate: 1.2, block: 1000 }
    }
}

impl AnnealSchedule {
    pub fn gamma_at(&self, step: usize) -> f64 {
        self.gamma0 * libm::pow(self.rate, (step / self.block.max(1)) as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapSearchConfig {
    /// Order moves per restart.
    pub steps: usize,
    /// Number of independent restarts `Z`.
    pub restarts: usize,
    pub schedule: AnnealSchedule,
    /// Relative tolerance for deciding that a restart found the overall best.
    pub tie_tolerance: f64,
}

impl Default for MapSearchConfig {
    fn default() -> Self {
        MapSearchConfig { steps: 5000, restarts: 100, schedule: AnnealSchedule::default(), tie_tolerance: 1e-9 }
    }
}

/// Best score of any DAG consistent with the order, and that DAG.
pub fn order_max_score(order: &NodeOrder, table: &ScoreTable) -> (f64, Dag) {
    let mut parents = alloc::vec![NodeSet::EMPTY; order.n()];
    let mut total = 0.0;
    let mut banned = NodeSet::EMPTY;
    for &v in order.as_slice() {
        banned.insert(v);
        let (pa, s) = table.best(v, banned, NodeSet::EMPTY).expect("empty set admissible");
        parents[v] = pa;
        total += s;
    }
    (total, Dag::from_parents_unchecked(parents))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartResult {
    pub best_score: f64,
    pub best_dag: Dag,
    pub accepted: usize,
}

/// One annealed run from `init`.
pub fn anneal_orders<R: Rng + ?Sized>(
    init: NodeOrder,
    table: &ScoreTable,
    config: &MapSearchConfig,
    rng: &mut R,
) -> RestartResult {
    let n = init.n();
    let mut order = init;
    let best_at = |order: &NodeOrder, p: usize, banned: NodeSet| {
        table.best(order.node_at(p), banned, NodeSet::EMPTY).expect("empty set admissible")
    };
    let mut per_position: Vec<(NodeSet, f64)> = Vec::with_capacity(n);
    let mut banned = NodeSet::EMPTY;
    for p in 0..n {
        banned.insert(order.node_at(p));
        per_position.push(best_at(&order, p, banned));
    }
    let mut score: f64 = per_position.iter().map(|x| x.1).sum();
    let dag_of = |order: &NodeOrder, per: &[(NodeSet, f64)]| {
        let mut parents = alloc::vec![NodeSet::EMPTY; n];
        for (p, &(pa, _)) in per.iter().enumerate() {
            parents[order.node_at(p)] = pa;
        }
        Dag::from_parents_unchecked(parents)
    };
    let mut best = RestartResult { best_score: score, best_dag: dag_of(&order, &per_position), accepted: 0 };
    for step in 0..config.steps {
        let Some(mv) = propose_order_move(n, rng) else { break };
        let mut next = order.clone();
        next.swap(mv.first, mv.second);
        let mut banned = next.banned_at(mv.first).without(next.node_at(mv.first));
        let mut fresh = Vec::with_capacity(mv.second - mv.first + 1);
        for p in mv.rescored_positions() {
            banned.insert(next.node_at(p));
            fresh.push(best_at(&next, p, banned));
        }
        let delta = fresh.iter().map(|x| x.1).sum::<f64>()
            - per_position[mv.rescored_positions()].iter().map(|x| x.1).sum::<f64>();
        if accept(config.schedule.gamma_at(step) * delta, rng) {
            order = next;
            per_position[mv.rescored_positions()].copy_from_slice(&fresh);
            score = per_position.iter().map(|x| x.1).sum();
            best.accepted += 1;
            if score > best.best_score {
                best.best_score = score;
                best.best_dag = dag_of(&order, &per_position);
            }
        }
    }
    best
}

/// Outcome of a multi-restart search with its confidence statement.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSearchReport {
    pub best_dag: Dag,
    pub best_score: f64,
    pub restart_scores: Vec<f64>,
    /// Restarts that reached the overall best score.
    pub hits: usize,
    /// `hits / restarts`.
    pub p_star: f64,
    /// `(1 - p*)^Z`.
    pub miss_bound: f64,
    /// `(1 - p*/W)^Z` with `W` the number of orders consistent with the best DAG,
    /// when that count is computable.
    pub adjusted_miss_bound: Option<f64>,
}

/// Runs `config.restarts` annealed searches from uniformly random orders.
pub fn map_search<R: Rng + ?Sized>(table: &ScoreTable, config: &MapSearchConfig, rng: &mut R) -> MapSearchReport {
    let z = config.restarts.max(1);
    let runs: Vec<RestartResult> =
        (0..z).map(|_| anneal_orders(NodeOrder::random(table.n(), rng), table, config, rng)).collect();
    summarise(table, runs, config.tie_tolerance)
}

/// Builds the report from finished restarts.
pub fn summarise(table: &ScoreTable, runs: Vec<RestartResult>, tie_tolerance: f64) -> MapSearchReport {
    let z = runs.len();
    let best = runs
        .iter()
        .fold(None, |acc: Option<&RestartResult>, r| match acc {
            Some(b) if b.best_score >= r.best_score => acc,
            _ => Some(r),
        })
        .expect("at least one restart");
    let tol = tie_tolerance * best.best_score.abs().max(1.0);
    let hits = runs.iter().filter(|r| best.best_score - r.best_score <= tol).count();
    let p_star = hits as f64 / z as f64;
    let miss_bound = libm::pow(1.0 - p_star, z as f64);
    let adjusted_miss_bound = (table.n() <= MAX_LINEAR_EXTENSION_NODES)
        .then(|| count_linear_extensions(&best.best_dag).expect("guarded"))
        .map(|w| libm::pow(1.0 - p_star / w as f64, z as f64));
    MapSearchReport {
        best_dag: best.best_dag.clone(),
        best_score: best.best_score,
        restart_scores: runs.iter().map(|r| r.best_score).collect(),
        hits,
        p_star,
        miss_bound,
        adjusted_miss_bound,
    }
}
