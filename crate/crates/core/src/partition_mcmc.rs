//! Partition MCMC: Metropolis–Hastings over labelled partitions.
//!
//! Each labelled partition stands for the DAGs whose outpoint decomposition it
//! is, and its score is the total score mass of those DAGs. Four move families
//! are provided: the basic split/join move, node relocation, and global or
//! adjacent swaps of node labels between elements. Acceptance uses the exact
//! proposal probabilities in both directions.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::chain::{ChainConfig, ChainError, ChainTrace, MoveKind};
use crate::edge_reversal::rev_step;
use crate::graph::{outpoint_decomposition, Dag};
use crate::large_move_weight;
use crate::logmath::{accept, log};
use crate::nodeset::NodeSet;
use crate::partition::{changed_nodes, LabelledPartition, NodeConstraint};
use crate::scoring::ScoreTable;

/// Score sum of one node under its constraints; `-inf` if no parent set qualifies.
fn node_sum(table: &ScoreTable, node: usize, c: NodeConstraint) -> f64 {
    table.log_sum(node, c.banned, c.required).unwrap_or(f64::NEG_INFINITY)
}

/// Log of the total score mass of the DAGs in `part`; `-inf` when some node
/// has no permissible parent set.
pub fn partition_log_score(part: &LabelledPartition, table: &ScoreTable) -> f64 {
    part.constraints()
        .into_iter()
        .enumerate()
        .map(|(node, c)| node_sum(table, node, c))
        .sum()
}

/// Draws a DAG of `part` with probability proportional to its score.
/// Panics if the partition has zero mass.
pub fn sample_dag_from_partition<R: Rng + ?Sized>(
    part: &LabelledPartition,
    table: &ScoreTable,
    rng: &mut R,
) -> Dag {
    let parents = part
        .constraints()
        .into_iter()
        .enumerate()
        .map(|(node, c)| {
            table
                .sample(node, c.banned, c.required, rng)
                .expect("partition with positive mass")
        })
        .collect();
    Dag::from_parents_unchecked(parents)
}

/// Cached constraints and node score sums for the current partition.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionScoreCache {
    constraints: Vec<NodeConstraint>,
    sums: Vec<f64>,
    total: f64,
}

impl PartitionScoreCache {
    pub fn new(part: &LabelledPartition, table: &ScoreTable) -> Self {
        let constraints = part.constraints();
        let sums: Vec<f64> = constraints
            .iter()
            .enumerate()
            .map(|(node, &c)| node_sum(table, node, c))
            .collect();
        let total = sums.iter().sum();
        PartitionScoreCache { constraints, sums, total }
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn constraints(&self) -> &[NodeConstraint] {
        &self.constraints
    }

    pub fn node_sums(&self) -> &[f64] {
        &self.sums
    }

    /// Cache for `next`, recomputing only nodes whose constraints changed.
    /// Returns the new cache and the rescored node set.
    pub fn update(&self, next: &LabelledPartition, table: &ScoreTable) -> (Self, NodeSet) {
        let constraints = next.constraints();
        let changed = changed_nodes(&self.constraints, &constraints);
        let mut sums = self.sums.clone();
        for node in changed {
            sums[node] = node_sum(table, node, constraints[node]);
        }
        let total = sums.iter().sum();
        (PartitionScoreCache { constraints, sums, total }, changed)
    }

    /// Draws a DAG of the cached partition using the cached normalisers.
    pub fn sample_dag<R: Rng + ?Sized>(&self, table: &ScoreTable, rng: &mut R) -> Dag {
        let parents = self
            .constraints
            .iter()
            .enumerate()
            .map(|(node, c)| {
                table
                    .sample_with_total(node, c.banned, c.required, self.sums[node], rng)
                    .expect("partition with positive mass")
            })
            .collect();
        Dag::from_parents_unchecked(parents)
    }
}

/// A proposed partition with its log Hastings factor
/// `log q(current | proposed) - log q(proposed | current)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionProposal {
    pub partition: LabelledPartition,
    pub log_hastings: f64,
    /// Nodes to rescore. For the basic move this is the left-hand element
    /// that was created or merged together with its left neighbour.
    pub rescore: NodeSet,
    pub kind: MoveKind,
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Size of the split/join neighbourhood: `m - 1 + sum_i (2^{k_i} - 2)`.
pub fn basic_neighborhood_size(lambda: &[usize]) -> u128 {
    let m = lambda.len() as u128;
    lambda.iter().map(|&k| (1u128 << k) - 2).sum::<u128>() + m - 1
}

/// Admissible relocations: `2mn` minus two per singleton and per pair element.
pub fn relocation_neighborhood_size(lambda: &[usize]) -> usize {
    let m = lambda.len();
    let n: usize = lambda.iter().sum();
    let small = lambda.iter().filter(|&&k| k <= 2).count();
    2 * m * n - 2 * small
}

/// Unordered pairs of nodes in different elements.
pub fn global_swap_neighborhood_size(lambda: &[usize]) -> usize {
    let n: usize = lambda.iter().sum();
    lambda.iter().map(|&k| k * (n - k)).sum::<usize>() / 2
}

/// Unordered pairs of nodes in adjacent elements.
pub fn adjacent_swap_neighborhood_size(lambda: &[usize]) -> usize {
    lambda.windows(2).map(|w| w[0] * w[1]).sum()
}

fn join(elements: &[NodeSet], left: usize) -> Vec<NodeSet> {
    let mut out = elements.to_vec();
    let right = out.remove(left + 1);
    out[left] = out[left].union(right);
    out
}

fn split(elements: &[NodeSet], element: usize, moved_left: NodeSet) -> Vec<NodeSet> {
    let mut out = elements.to_vec();
    out[element] = out[element].difference(moved_left);
    out.insert(element, moved_left);
    out
}

/// The nodes the prose rescoring rule names after a basic move whose new or
/// merged element sits at `index` of `after`: that element and the one to its left.
fn basic_rescore(after: &[NodeSet], index: usize) -> NodeSet {
    let left = if index > 0 { after[index - 1] } else { NodeSet::EMPTY };
    after[index].union(left)
}

/// Every basic-move outcome, joins first and then splits element by element.
/// Each outcome appears exactly once.
pub fn basic_moves(part: &LabelledPartition) -> Vec<LabelledPartition> {
    let n = part.n();
    let el = part.elements();
    let mut out = Vec::new();
    for i in 0..el.len().saturating_sub(1) {
        out.push(LabelledPartition::from_elements_unchecked(n, join(el, i)));
    }
    for (i, &e) in el.iter().enumerate() {
        for sub in crate::nodeset::subsets_up_to(e, e.len() - 1) {
            if !sub.is_empty() {
                out.push(LabelledPartition::from_elements_unchecked(n, split(el, i, sub)));
            }
        }
    }
    out
}

/// Draws a split/join move uniformly from the basic neighbourhood.
/// `None` when the neighbourhood is empty (a single node).
pub fn propose_basic_move<R: Rng + ?Sized>(part: &LabelledPartition, rng: &mut R) -> Option<PartitionProposal> {
    let lambda = part.lambda();
    let size = basic_neighborhood_size(&lambda);
    if size == 0 {
        return None;
    }
    let m = lambda.len();
    let el = part.elements();
    let j = rng.random_range(1..=size);
    let (elements, index) = if j < m as u128 {
        let left = (j - 1) as usize;
        (join(el, left), left)
    } else {
        let mut acc = m as u128 - 1;
        let mut target = None;
        'outer: for (i, &k) in lambda.iter().enumerate() {
            if acc + (1u128 << k) - 2 < j {
                acc += (1u128 << k) - 2;
                continue;
            }
            for c in 1..k {
                acc += binomial(k, c);
                if acc >= j {
                    target = Some((i, c));
                    break 'outer;
                }
            }
        }
        let (i, c) = target.expect("index within the neighbourhood");
        let mut nodes: Vec<usize> = el[i].iter().collect();
        let (chosen, _) = nodes.partial_shuffle(rng, c);
        let moved: NodeSet = chosen.iter().copied().collect();
        (split(el, i, moved), i)
    };
    let rescore = basic_rescore(&elements, index);
    let partition = LabelledPartition::from_elements_unchecked(part.n(), elements);
    let back = basic_neighborhood_size(&partition.lambda());
    Some(PartitionProposal {
        log_hastings: log(size as f64) - log(back as f64),
        partition,
        rescore,
        kind: MoveKind::PartitionBasic,
    })
}

/// Where a relocated node goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Destination {
    /// A new singleton element in gap `g`, the gap just left of element `g`
    /// (`g = m` is the far right).
    Gap(usize),
    /// An existing element other than the node's own.
    Element(usize),
}

/// Whether moving `node` to `dest` is one of the admissible relocations.
/// Moves that only reproduce the current partition are excluded: a singleton
/// into either adjacent gap and a member of a pair into the gap on its left.
pub fn relocation_admissible(part: &LabelledPartition, node: usize, dest: Destination) -> bool {
    let own = part.element_of(node);
    let size = part.elements()[own].len();
    match dest {
        Destination::Element(e) => e != own && e < part.len(),
        Destination::Gap(g) => {
            g <= part.len() && !(size == 1 && (g == own || g == own + 1)) && !(size == 2 && g == own)
        }
    }
}

/// The partition obtained by moving `node` to `dest`.
pub fn apply_relocation(part: &LabelledPartition, node: usize, dest: Destination) -> LabelledPartition {
    let el = part.elements();
    let mut out = Vec::with_capacity(el.len() + 1);
    for (idx, &e) in el.iter().enumerate() {
        if dest == Destination::Gap(idx) {
            out.push(NodeSet::singleton(node));
        }
        let mut e = e.without(node);
        if dest == Destination::Element(idx) {
            e.insert(node);
        }
        if !e.is_empty() {
            out.push(e);
        }
    }
    if dest == Destination::Gap(el.len()) {
        out.push(NodeSet::singleton(node));
    }
    LabelledPartition::from_elements_unchecked(part.n(), out)
}

/// All admissible `(node, destination)` pairs.
pub fn relocation_moves(part: &LabelledPartition) -> Vec<(usize, Destination)> {
    let m = part.len();
    let mut out = Vec::new();
    for node in 0..part.n() {
        let dests = (0..=m).map(Destination::Gap).chain((0..m).map(Destination::Element));
        for dest in dests {
            if relocation_admissible(part, node, dest) {
                out.push((node, dest));
            }
        }
    }
    out
}

/// Number of admissible relocations from `from` that produce `to`.
pub fn relocation_multiplicity(from: &LabelledPartition, to: &LabelledPartition) -> usize {
    relocation_moves(from)
        .into_iter()
        .filter(|&(node, dest)| apply_relocation(from, node, dest) == *to)
        .count()
}

/// `log q(from | to) - log q(to | from)` for the relocation move, with
/// `q(b | a) = multiplicity(a -> b) / nbd(a)`.
pub fn relocation_log_hastings(from: &LabelledPartition, to: &LabelledPartition) -> f64 {
    let fwd = relocation_multiplicity(from, to) as f64 / relocation_neighborhood_size(&from.lambda()) as f64;
    let back = relocation_multiplicity(to, from) as f64 / relocation_neighborhood_size(&to.lambda()) as f64;
    log(back) - log(fwd)
}

/// Moves one node to a uniformly chosen admissible destination.
/// `None` when no relocation is admissible (a single node).
pub fn propose_node_relocation<R: Rng + ?Sized>(
    part: &LabelledPartition,
    rng: &mut R,
) -> Option<PartitionProposal> {
    if relocation_neighborhood_size(&part.lambda()) == 0 {
        return None;
    }
    let m = part.len();
    let (node, dest) = loop {
        let node = rng.random_range(0..part.n());
        let d = rng.random_range(0..2 * m);
        let dest = if d <= m { Destination::Gap(d) } else { Destination::Element(d - m - 1) };
        let dest = match dest {
            Destination::Element(e) if e >= part.element_of(node) => Destination::Element(e + 1),
            other => other,
        };
        if relocation_admissible(part, node, dest) {
            break (node, dest);
        }
    };
    let partition = apply_relocation(part, node, dest);
    let log_hastings = relocation_log_hastings(part, &partition);
    let rescore = changed_nodes(&part.constraints(), &partition.constraints());
    Some(PartitionProposal { partition, log_hastings, rescore, kind: MoveKind::PartitionRelocation })
}

fn swap_nodes(part: &LabelledPartition, x: usize, y: usize) -> LabelledPartition {
    let elements = part
        .elements()
        .iter()
        .map(|&e| match (e.contains(x), e.contains(y)) {
            (true, false) => e.without(x).with(y),
            (false, true) => e.without(y).with(x),
            _ => e,
        })
        .collect();
    LabelledPartition::from_elements_unchecked(part.n(), elements)
}

/// Every swap outcome, each unordered pair once.
pub fn swap_moves(part: &LabelledPartition, adjacent_only: bool) -> Vec<LabelledPartition> {
    let mut out = Vec::new();
    for x in 0..part.n() {
        for y in x + 1..part.n() {
            let (ex, ey) = (part.element_of(x), part.element_of(y));
            let ok = if adjacent_only { ex.abs_diff(ey) == 1 } else { ex != ey };
            if ok {
                out.push(swap_nodes(part, x, y));
            }
        }
    }
    out
}

/// Swaps the labels of two nodes in different (or, with `adjacent_only`,
/// neighbouring) elements. `None` when the partition has a single element.
pub fn propose_swap_move<R: Rng + ?Sized>(
    part: &LabelledPartition,
    adjacent_only: bool,
    rng: &mut R,
) -> Option<PartitionProposal> {
    if part.len() < 2 {
        return None;
    }
    let el = part.elements();
    let (x, y, kind) = if adjacent_only {
        let lambda = part.lambda();
        let mut r = rng.random_range(0..adjacent_swap_neighborhood_size(&lambda));
        let mut j = 0;
        while r >= lambda[j] * lambda[j + 1] {
            r -= lambda[j] * lambda[j + 1];
            j += 1;
        }
        let x = el[j].nth(rng.random_range(0..lambda[j])).expect("index within element");
        let y = el[j + 1].nth(rng.random_range(0..lambda[j + 1])).expect("index within element");
        (x, y, MoveKind::PartitionAdjacentSwap)
    } else {
        let n = part.n();
        loop {
            let x = rng.random_range(0..n);
            let y = rng.random_range(0..n);
            if part.element_of(x) != part.element_of(y) {
                break (x, y, MoveKind::PartitionGlobalSwap);
            }
        }
    };
    let partition = swap_nodes(part, x, y);
    let rescore = changed_nodes(&part.constraints(), &partition.constraints());
    Some(PartitionProposal { partition, log_hastings: 0.0, rescore, kind })
}

/// Draws the partition-class or permutation-class move according to `config`.
pub fn propose_partition_move<R: Rng + ?Sized>(
    part: &LabelledPartition,
    config: &ChainConfig,
    rng: &mut R,
) -> Option<PartitionProposal> {
    let w = large_move_weight(part.n());
    if rng.random::<f64>() < config.partition_move_prob {
        if rng.random::<f64>() < w {
            propose_node_relocation(part, rng)
        } else {
            propose_basic_move(part, rng)
        }
    } else if rng.random::<f64>() < w {
        propose_swap_move(part, false, rng)
    } else {
        propose_swap_move(part, true, rng)
    }
}

/// Partition chain state with its score cache.
#[derive(Debug, Clone)]
pub struct PartitionChain<'a> {
    table: &'a ScoreTable,
    part: LabelledPartition,
    cache: PartitionScoreCache,
}

impl<'a> PartitionChain<'a> {
    pub fn new(part: LabelledPartition, table: &'a ScoreTable) -> Result<Self, ChainError> {
        if part.n() != table.n() {
            return Err(ChainError::Config("initial partition does not match the score table"));
        }
        let cache = PartitionScoreCache::new(&part, table);
        if cache.total() == f64::NEG_INFINITY {
            return Err(ChainError::ZeroMassInit);
        }
        Ok(PartitionChain { table, part, cache })
    }

    pub fn partition(&self) -> &LabelledPartition {
        &self.part
    }

    pub fn cache(&self) -> &PartitionScoreCache {
        &self.cache
    }

    pub fn log_score(&self) -> f64 {
        self.cache.total()
    }

    /// Metropolis–Hastings test of a proposal; returns acceptance and rescored node count.
    pub fn try_proposal<R: Rng + ?Sized>(&mut self, proposal: PartitionProposal, rng: &mut R) -> (bool, u64) {
        let (cache, changed) = self.cache.update(&proposal.partition, self.table);
        let log_ratio = if cache.total() == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            changed.iter().map(|v| cache.sums[v] - self.cache.sums[v]).sum::<f64>() + proposal.log_hastings
        };
        let accepted = accept(log_ratio, rng);
        if accepted {
            self.part = proposal.partition;
            self.cache = cache;
        }
        (accepted, changed.len() as u64)
    }

    /// Edge reversal through a DAG drawn from the current partition.
    pub fn rev_step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> (bool, u64) {
        let dag = self.cache.sample_dag(self.table, rng);
        let outcome = rev_step(&dag, self.table, rng);
        if !outcome.accepted {
            return (false, 0);
        }
        self.part = outpoint_decomposition(&outcome.dag);
        self.cache = PartitionScoreCache::new(&self.part, self.table);
        (true, self.part.n() as u64)
    }

    /// One transition of the full move mixture.
    pub fn step<R: Rng + ?Sized>(&mut self, config: &ChainConfig, rng: &mut R) -> (MoveKind, bool, u64) {
        let u: f64 = rng.random();
        if u < config.stay_still_prob {
            return (MoveKind::Stay, true, 0);
        }
        if u < config.stay_still_prob + config.p_rev {
            let (accepted, rescored) = self.rev_step(rng);
            return (MoveKind::EdgeReversal, accepted, rescored);
        }
        match propose_partition_move(&self.part, config, rng) {
            None => (MoveKind::Stay, true, 0),
            Some(p) => {
                let kind = p.kind;
                let (accepted, rescored) = self.try_proposal(p, rng);
                (kind, accepted, rescored)
            }
        }
    }
}

/// Runs partition MCMC, drawing one DAG from the current partition per recorded step.
pub fn run_partition_chain<R: Rng + ?Sized>(
    init: LabelledPartition,
    table: &ScoreTable,
    config: &ChainConfig,
    rng: &mut R,
) -> Result<ChainTrace, ChainError> {
    config.validate()?;
    let mut chain = PartitionChain::new(init, table)?;
    let mut trace = ChainTrace::with_capacity(config);
    for step in 0..config.steps {
        if step > 0 {
            let (kind, accepted, rescored) = chain.step(config, rng);
            trace.stats.record(kind, accepted);
            trace.stats.rescored_nodes += rescored;
        }
        trace.record(step, config.thin, chain.log_score(), || {
            let dag = chain.cache.sample_dag(table, rng);
            let s = table.dag_log_score(&dag).expect("sampled within the table");
            (dag, s)
        });
    }
    Ok(trace)
}
