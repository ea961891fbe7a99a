//! Structure MCMC: single-edge Metropolis–Hastings moves on DAGs.
//!
//! A proposal is drawn uniformly from the neighbourhood (self, deletions,
//! additions and optionally reversals) subject to the in-degree limit of the
//! score table. Acceptance uses the exact neighbourhood sizes of both graphs.

use rand::Rng;

use crate::chain::{ChainConfig, ChainError, ChainTrace, MoveKind};
use crate::edge_reversal::rev_step;
use crate::graph::{ancestor_matrix, AncestorMatrix, Dag, NeighborhoodRules, StructureMove, StructureNeighborhood};
use crate::logmath::{accept, log};
use crate::scoring::{ScoreError, ScoreTable};

pub fn rules_for(table: &ScoreTable, config: &ChainConfig) -> NeighborhoodRules {
    NeighborhoodRules { max_parents: table.max_parents(), include_reversals: config.include_reversals }
}

/// Log score difference of a single-edge move, rescoring only the touched nodes.
pub fn move_log_delta(dag: &Dag, proposed: &Dag, mv: StructureMove, table: &ScoreTable) -> f64 {
    let term = |g: &Dag, v: usize| table.score(v, g.parents(v)).expect("parent set within limit");
    match mv {
        StructureMove::Stay => 0.0,
        StructureMove::Add(e) | StructureMove::Delete(e) => term(proposed, e.to) - term(dag, e.to),
        StructureMove::Reverse(e) => {
            term(proposed, e.to) + term(proposed, e.from) - term(dag, e.to) - term(dag, e.from)
        }
    }
}

/// Log acceptance ratio of moving `dag -> proposed`:
/// `log(|nbd(G)| P(G')) - log(|nbd(G')| P(G))`.
pub fn structure_log_acceptance(
    dag: &Dag,
    nbd: &StructureNeighborhood,
    proposed: &Dag,
    proposed_nbd: &StructureNeighborhood,
    mv: StructureMove,
    table: &ScoreTable,
) -> f64 {
    log(nbd.size() as f64) - log(proposed_nbd.size() as f64) + move_log_delta(dag, proposed, mv, table)
}

/// Chain state with ancestor matrix and neighbourhood kept current.
#[derive(Debug, Clone)]
pub struct StructureChain<'a> {
    table: &'a ScoreTable,
    rules: NeighborhoodRules,
    dag: Dag,
    ancestors: AncestorMatrix,
    nbd: StructureNeighborhood,
    score: f64,
}

impl<'a> StructureChain<'a> {
    pub fn new(dag: Dag, table: &'a ScoreTable, rules: NeighborhoodRules) -> Result<Self, ScoreError> {
        let score = table.dag_log_score(&dag)?;
        let ancestors = ancestor_matrix(&dag);
        let nbd = StructureNeighborhood::new(&dag, &ancestors, rules);
        Ok(StructureChain { table, rules, dag, ancestors, nbd, score })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn log_score(&self) -> f64 {
        self.score
    }

    pub fn neighborhood(&self) -> &StructureNeighborhood {
        &self.nbd
    }

    /// One single-edge Metropolis–Hastings step.
    pub fn structure_step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let mv = self.nbd.get(rng.random_range(0..self.nbd.size())).expect("index within size");
        if mv == StructureMove::Stay {
            return true;
        }
        let proposed = self.dag.apply(mv);
        let mut ancestors = self.ancestors.clone();
        ancestors.apply_move(&proposed, mv);
        let nbd = StructureNeighborhood::new(&proposed, &ancestors, self.rules);
        let delta = move_log_delta(&self.dag, &proposed, mv, self.table);
        let log_ratio = log(self.nbd.size() as f64) - log(nbd.size() as f64) + delta;
        if accept(log_ratio, rng) {
            self.dag = proposed;
            self.ancestors = ancestors;
            self.nbd = nbd;
            self.score += delta;
            true
        } else {
            false
        }
    }

    /// One edge reversal step; the score is recomputed from scratch on acceptance.
    pub fn rev_step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let outcome = rev_step(&self.dag, self.table, rng);
        if outcome.accepted {
            self.score = self.table.dag_log_score(&outcome.dag).expect("draws respect the limit");
            self.ancestors = ancestor_matrix(&outcome.dag);
            self.nbd = StructureNeighborhood::new(&outcome.dag, &self.ancestors, self.rules);
            self.dag = outcome.dag;
        }
        outcome.accepted
    }

    /// Stay, edge reversal or a structure step according to `config`.
    pub fn step<R: Rng + ?Sized>(&mut self, config: &ChainConfig, rng: &mut R) -> (MoveKind, bool) {
        let u: f64 = rng.random();
        if u < config.stay_still_prob {
            (MoveKind::Stay, true)
        } else if u < config.stay_still_prob + config.p_rev {
            (MoveKind::EdgeReversal, self.rev_step(rng))
        } else {
            (MoveKind::Structure, self.structure_step(rng))
        }
    }
}

/// A single structure step from `state`, building the neighbourhoods from scratch.
pub fn structure_step<R: Rng + ?Sized>(
    state: &Dag,
    table: &ScoreTable,
    config: &ChainConfig,
    rng: &mut R,
) -> Result<Dag, ScoreError> {
    let mut chain = StructureChain::new(state.clone(), table, rules_for(table, config))?;
    chain.structure_step(rng);
    Ok(chain.dag)
}

/// Runs structure MCMC, mixing in edge reversal moves with probability `config.p_rev`.
pub fn run_structure_chain<R: Rng + ?Sized>(
    init: Dag,
    table: &ScoreTable,
    config: &ChainConfig,
    rng: &mut R,
) -> Result<ChainTrace, ChainError> {
    config.validate()?;
    let mut chain = StructureChain::new(init, table, rules_for(table, config))?;
    let mut trace = ChainTrace::with_capacity(config);
    for step in 0..config.steps {
        if step > 0 {
            let before = chain.dag.clone();
            let (kind, accepted) = chain.step(config, rng);
            trace.stats.record(kind, accepted);
            if accepted {
                trace.stats.rescored_nodes +=
                    (0..before.n()).filter(|&v| before.parents(v) != chain.dag.parents(v)).count() as u64;
            }
        }
        let score = chain.score;
        trace.record(step, config.thin, score, || (chain.dag.clone(), score));
    }
    Ok(trace)
}
