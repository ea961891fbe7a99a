//! Chain configuration and traces shared by every sampler.

use alloc::vec::Vec;

use crate::graph::Dag;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChainError {
    #[error("invalid chain configuration: {0}")]
    Config(&'static str),
    #[error("initial state has zero posterior mass")]
    ZeroMassInit,
    #[error("initial state does not fit the score table: {0}")]
    Init(#[from] crate::scoring::ScoreError),
    #[error("no samples left after burn-in")]
    NoSamples,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    /// Number of states in the chain, the initial state included.
    pub steps: usize,
    /// Keep a sampled DAG every `thin` states.
    pub thin: usize,
    /// Fraction of the chain discarded when summarising.
    pub burn_in_fraction: f64,
    pub stay_still_prob: f64,
    /// Probability of the edge reversal move that resamples both endpoint parent sets.
    pub p_rev: f64,
    /// Standard single-edge reversals in the structure neighbourhood.
    pub include_reversals: bool,
    /// Partition-class vs permutation-class split in partition MCMC (3:2).
    pub partition_move_prob: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            steps: 10_000,
            thin: 1,
            burn_in_fraction: 0.2,
            stay_still_prob: 0.01,
            p_rev: 0.0,
            include_reversals: true,
            partition_move_prob: 0.6,
        }
    }
}

/// Default probability of the edge reversal move when it is enabled.
pub const DEFAULT_P_REV: f64 = 0.07;

impl ChainConfig {
    pub fn new(steps: usize) -> Self {
        ChainConfig { steps, ..Self::default() }
    }

    pub fn with_rev(mut self) -> Self {
        self.p_rev = DEFAULT_P_REV;
        self
    }

    pub fn validate(&self) -> Result<(), ChainError> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if self.steps == 0 {
            return Err(ChainError::Config("steps must be at least 1"));
        }
        if self.thin == 0 {
            return Err(ChainError::Config("thin must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.burn_in_fraction) {
            return Err(ChainError::Config("burn-in fraction must lie in [0, 1)"));
        }
        if !prob(self.stay_still_prob) || !(0.0..1.0).contains(&self.p_rev) {
            return Err(ChainError::Config("move probabilities must lie in [0, 1]"));
        }
        if self.stay_still_prob + self.p_rev > 1.0 {
            return Err(ChainError::Config("stay-still and reversal probabilities exceed one"));
        }
        if !prob(self.partition_move_prob) {
            return Err(ChainError::Config("partition move probability must lie in [0, 1]"));
        }
        Ok(())
    }

    /// First step index kept after burn-in.
    pub fn burn_in_steps(&self) -> usize {
        libm::ceil(self.burn_in_fraction * self.steps as f64) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveKind {
    Stay,
    Structure,
    EdgeReversal,
    OrderGlobalSwap,
    OrderAdjacentSwap,
    PartitionBasic,
    PartitionRelocation,
    PartitionGlobalSwap,
    PartitionAdjacentSwap,
}

impl MoveKind {
    pub const ALL: [MoveKind; 9] = [
        MoveKind::Stay,
        MoveKind::Structure,
        MoveKind::EdgeReversal,
        MoveKind::OrderGlobalSwap,
        MoveKind::OrderAdjacentSwap,
        MoveKind::PartitionBasic,
        MoveKind::PartitionRelocation,
        MoveKind::PartitionGlobalSwap,
        MoveKind::PartitionAdjacentSwap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MoveKind::Stay => "stay",
            MoveKind::Structure => "structure",
            MoveKind::EdgeReversal => "edge_reversal",
            MoveKind::OrderGlobalSwap => "order_global_swap",
            MoveKind::OrderAdjacentSwap => "order_adjacent_swap",
            MoveKind::PartitionBasic => "partition_basic",
            MoveKind::PartitionRelocation => "partition_relocation",
            MoveKind::PartitionGlobalSwap => "partition_global_swap",
            MoveKind::PartitionAdjacentSwap => "partition_adjacent_swap",
        }
    }
}

/// Proposal and acceptance counts per move type, plus rescoring work.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MoveStats {
    proposed: [u64; 9],
    accepted: [u64; 9],
    /// Node score sums recomputed over the whole run.
    pub rescored_nodes: u64,
}

impl MoveStats {
    pub fn record(&mut self, kind: MoveKind, accepted: bool) {
        self.proposed[kind as usize] += 1;
        if accepted {
            self.accepted[kind as usize] += 1;
        }
    }

    pub fn proposed(&self, kind: MoveKind) -> u64 {
        self.proposed[kind as usize]
    }

    pub fn accepted(&self, kind: MoveKind) -> u64 {
        self.accepted[kind as usize]
    }
}

/// A thinned record: the chain state's score and one DAG drawn from it.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub step: usize,
    pub state_log_score: f64,
    pub dag_log_score: f64,
    pub dag: Dag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrace {
    /// State score at every step.
    pub state_log_scores: Vec<f64>,
    /// Samples at steps `0, thin, 2 thin, ..`.
    pub samples: Vec<Sample>,
    pub stats: MoveStats,
    pub burn_in_steps: usize,
}

impl ChainTrace {
    pub(crate) fn with_capacity(config: &ChainConfig) -> Self {
        ChainTrace {
            state_log_scores: Vec::with_capacity(config.steps),
            samples: Vec::with_capacity(config.steps / config.thin + 1),
            stats: MoveStats::default(),
            burn_in_steps: config.burn_in_steps(),
        }
    }

    /// Records the state at `step`; `draw` is called only on thinned steps.
    pub(crate) fn record(
        &mut self,
        step: usize,
        thin: usize,
        state_log_score: f64,
        draw: impl FnOnce() -> (Dag, f64),
    ) {
        self.state_log_scores.push(state_log_score);
        if step.is_multiple_of(thin) {
            let (dag, dag_log_score) = draw();
            self.samples.push(Sample { step, state_log_score, dag_log_score, dag });
        }
    }

    pub fn post_burn_in(&self) -> &[Sample] {
        let start = self.samples.partition_point(|s| s.step < self.burn_in_steps);
        &self.samples[start..]
    }

    pub fn best_dag_log_score(&self) -> f64 {
        self.samples.iter().map(|s| s.dag_log_score).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn best_state_log_score(&self) -> f64 {
        self.state_log_scores.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Highest-scoring sampled DAG.
    pub fn best_sample(&self) -> Option<&Sample> {
        self.samples.iter().fold(None, |best: Option<&Sample>, s| match best {
            Some(b) if b.dag_log_score >= s.dag_log_score => best,
            _ => Some(s),
        })
    }
}

/// Fraction of DAGs containing each edge; entry `[i][j]` is the frequency of `j -> i`.
pub fn edge_frequencies<'a>(dags: impl IntoIterator<Item = &'a Dag>, n: usize) -> Option<Vec<Vec<f64>>> {
    let mut counts = alloc::vec![alloc::vec![0u64; n]; n];
    let mut total = 0u64;
    for dag in dags {
        total += 1;
        for e in dag.edges() {
            counts[e.to][e.from] += 1;
        }
    }
    (total > 0).then(|| {
        counts
            .into_iter()
            .map(|row| row.into_iter().map(|c| c as f64 / total as f64).collect())
            .collect()
    })
}

/// Edge posterior pooled over the post-burn-in samples of several chains.
pub fn edge_posterior(traces: &[ChainTrace], n: usize) -> Result<Vec<Vec<f64>>, ChainError> {
    edge_frequencies(traces.iter().flat_map(|t| t.post_burn_in().iter().map(|s| &s.dag)), n)
        .ok_or(ChainError::NoSamples)
}
