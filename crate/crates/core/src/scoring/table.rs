use alloc::vec::Vec;

use rand::Rng;

use super::{BgeParams, BgeScorer, DataSet, ScoreError};
use crate::graph::Dag;
use crate::logmath::{exp, log, log_sub_exp};
use crate::nodeset::{subsets_up_to, NodeSet};

/// Log scores of every parent set of size at most `max_parents`, per node.
///
/// Entries for each node are sorted by ascending mask value.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    max_parents: usize,
    nodes: Vec<NodeEntries>,
}

#[derive(Debug, Clone, PartialEq)]
struct NodeEntries {
    masks: Vec<NodeSet>,
    scores: Vec<f64>,
}

/// Number of parent sets of size `<= max_parents` drawn from `n - 1` candidates.
pub fn entries_per_node(n: usize, max_parents: usize) -> usize {
    let others = n.saturating_sub(1) as u64;
    let mut total = 0u64;
    let mut binom = 1u64;
    for c in 0..=max_parents.min(others as usize) as u64 {
        total += binom;
        binom = binom * (others - c) / (c + 1);
    }
    total as usize
}

impl ScoreTable {
    /// Scores every admissible parent set with the BGe marginal likelihood.
    ///
    /// Constant columns and data sets with `N <= max_parents + 1` are rejected.
    pub fn build(data: &DataSet, max_parents: usize, params: &BgeParams) -> Result<Self, ScoreError> {
        let n = data.n_vars();
        Self::check_data(data, max_parents)?;
        let scorer = BgeScorer::new(data, params)?;
        let nodes = (0..n)
            .map(|node| Self::node_entries(&scorer, node, max_parents))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_entries(max_parents, nodes)
    }

    /// Validation performed by [`ScoreTable::build`].
    pub fn check_data(data: &DataSet, max_parents: usize) -> Result<(), ScoreError> {
        let n = data.n_vars();
        if max_parents >= n.max(1) {
            return Err(ScoreError::ParentLimit { max_parents, n });
        }
        if let Some(col) = data.constant_column() {
            return Err(ScoreError::ConstantColumn(col));
        }
        if data.n_obs() <= max_parents + 1 {
            return Err(ScoreError::TooFewObservations {
                observations: data.n_obs(),
                max_parents,
            });
        }
        Ok(())
    }

    /// Scored parent sets of one node, ascending by mask.
    pub fn node_entries(
        scorer: &BgeScorer,
        node: usize,
        max_parents: usize,
    ) -> Result<Vec<(NodeSet, f64)>, ScoreError> {
        let others = NodeSet::full(scorer.n()).without(node);
        subsets_up_to(others, max_parents)
            .into_iter()
            .map(|pa| scorer.node_log_score(node, pa).map(|s| (pa, s)))
            .collect()
    }

    /// Assembles a table from per-node entry lists (any order; sorted here).
    pub fn from_entries(
        max_parents: usize,
        nodes: Vec<Vec<(NodeSet, f64)>>,
    ) -> Result<Self, ScoreError> {
        let n = nodes.len();
        if n > 0 && max_parents >= n {
            return Err(ScoreError::ParentLimit { max_parents, n });
        }
        let nodes = nodes
            .into_iter()
            .enumerate()
            .map(|(node, mut entries)| {
                entries.sort_by_key(|&(m, _)| m);
                if let Some(&(parents, _)) = entries.iter().find(|(_, s)| !s.is_finite()) {
                    return Err(ScoreError::NonFiniteScore { node, parents });
                }
                Ok(NodeEntries {
                    masks: entries.iter().map(|e| e.0).collect(),
                    scores: entries.iter().map(|e| e.1).collect(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ScoreTable { max_parents, nodes })
    }

    /// A table whose entries come from an arbitrary score function.
    ///
    /// # Panics
    /// If `score` returns a non-finite value or `max_parents >= n`.
    pub fn from_fn(n: usize, max_parents: usize, mut score: impl FnMut(usize, NodeSet) -> f64) -> Self {
        let nodes = (0..n)
            .map(|node| {
                subsets_up_to(NodeSet::full(n).without(node), max_parents)
                    .into_iter()
                    .map(|pa| (pa, score(node, pa)))
                    .collect()
            })
            .collect();
        Self::from_entries(max_parents, nodes).expect("finite scores and a valid parent limit")
    }

    /// Adds `log_prior_per_parent * |Pa|` to every entry (a modular edge prior).
    pub fn with_parent_penalty(mut self, log_prior_per_parent: f64) -> Self {
        for node in &mut self.nodes {
            for (m, s) in node.masks.iter().zip(node.scores.iter_mut()) {
                *s += log_prior_per_parent * m.len() as f64;
            }
        }
        self
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn max_parents(&self) -> usize {
        self.max_parents
    }

    pub fn len(&self, node: usize) -> usize {
        self.nodes[node].masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_entries(&self) -> usize {
        self.nodes.iter().map(|e| e.masks.len()).sum()
    }

    pub fn entries(&self, node: usize) -> impl Iterator<Item = (NodeSet, f64)> + '_ {
        let e = &self.nodes[node];
        e.masks.iter().copied().zip(e.scores.iter().copied())
    }

    /// Tabulated score of one parent set, if present.
    pub fn score(&self, node: usize, parents: NodeSet) -> Option<f64> {
        let e = &self.nodes[node];
        e.masks.binary_search(&parents).ok().map(|i| e.scores[i])
    }

    /// Sum over nodes of the tabulated parent-set scores.
    pub fn dag_log_score(&self, dag: &Dag) -> Result<f64, ScoreError> {
        if dag.n() != self.n() {
            return Err(ScoreError::NodeCount { table: self.n(), graph: dag.n() });
        }
        (0..dag.n())
            .map(|node| {
                let pa = dag.parents(node);
                self.score(node, pa).ok_or(ScoreError::ParentSetTooLarge {
                    node,
                    size: pa.len(),
                    max_parents: self.max_parents,
                })
            })
            .sum()
    }

    #[inline]
    fn admissible(
        &self,
        node: usize,
        banned: NodeSet,
        required: NodeSet,
    ) -> impl Iterator<Item = (NodeSet, f64)> + '_ {
        self.entries(node).filter(move |&(m, _)| {
            !m.intersects(banned) && (required.is_empty() || m.intersects(required))
        })
    }

    /// `log sum exp(score)` over parent sets avoiding `banned` and, when
    /// `required` is non-empty, meeting it. `None` when no set qualifies.
    pub fn log_sum(&self, node: usize, banned: NodeSet, required: NodeSet) -> Option<f64> {
        let max = self
            .admissible(node, banned, required)
            .map(|(_, s)| s)
            .fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return None;
        }
        let sum: f64 = self.admissible(node, banned, required).map(|(_, s)| exp(s - max)).sum();
        Some(max + log(sum))
    }

    /// The same quantity as [`ScoreTable::log_sum`], computed as the sum over
    /// sets avoiding `banned` minus the sum over sets avoiding `banned + required`.
    pub fn log_sum_by_difference(&self, node: usize, banned: NodeSet, required: NodeSet) -> Option<f64> {
        let allowed = self.log_sum(node, banned, NodeSet::EMPTY)?;
        if required.is_empty() {
            return Some(allowed);
        }
        let avoiding = self
            .log_sum(node, banned.union(required), NodeSet::EMPTY)
            .unwrap_or(f64::NEG_INFINITY);
        let diff = log_sub_exp(allowed, avoiding);
        (diff > f64::NEG_INFINITY).then_some(diff)
    }

    /// Highest-scoring admissible parent set.
    pub fn best(&self, node: usize, banned: NodeSet, required: NodeSet) -> Option<(NodeSet, f64)> {
        self.admissible(node, banned, required)
            .fold(None, |best: Option<(NodeSet, f64)>, (m, s)| match best {
                Some((_, bs)) if bs >= s => best,
                _ => Some((m, s)),
            })
    }

    /// Draws an admissible parent set with probability proportional to its score.
    /// `log_total` must be the matching [`ScoreTable::log_sum`].
    pub fn sample_with_total<R: Rng + ?Sized>(
        &self,
        node: usize,
        banned: NodeSet,
        required: NodeSet,
        log_total: f64,
        rng: &mut R,
    ) -> Option<NodeSet> {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last = None;
        for (m, s) in self.admissible(node, banned, required) {
            acc += exp(s - log_total);
            last = Some(m);
            if u < acc {
                return last;
            }
        }
        // Rounding can leave `acc` a hair below one.
        last
    }

    pub fn sample<R: Rng + ?Sized>(
        &self,
        node: usize,
        banned: NodeSet,
        required: NodeSet,
        rng: &mut R,
    ) -> Option<NodeSet> {
        let total = self.log_sum(node, banned, required)?;
        self.sample_with_total(node, banned, required, total, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn set(nodes: &[usize]) -> NodeSet {
        nodes.iter().copied().collect()
    }

    #[test]
    fn entry_counts() {
        assert_eq!(entries_per_node(3, 2), 4);
        assert_eq!(entries_per_node(5, 4), 16);
        assert_eq!(entries_per_node(14, 4), 1093);
        let t = ScoreTable::from_fn(3, 2, |_, _| 0.0);
        assert_eq!(t.total_entries(), 12);
        let t = ScoreTable::from_fn(5, 4, |_, _| 0.0);
        assert_eq!(t.len(0), 16);
    }

    #[test]
    fn entries_sorted_by_mask() {
        let t = ScoreTable::from_fn(5, 2, |_, pa| pa.bits() as f64);
        for node in 0..5 {
            let masks: Vec<_> = t.entries(node).map(|(m, _)| m).collect();
            assert!(masks.windows(2).all(|w| w[0] < w[1]));
            assert!(masks.iter().all(|m| !m.contains(node) && m.len() <= 2));
        }
    }

    #[test]
    fn constrained_sum_three_sets() {
        // λ = [1,2,2], π = (2,3,4,1,5): node 3 may not use {2,4} and needs one of {1,5}.
        let t = ScoreTable::from_fn(5, 4, |_, pa| 0.1 * pa.bits() as f64);
        let node = 2;
        let banned = set(&[1, 3]);
        let required = set(&[0, 4]);
        let got = t.log_sum(node, banned, required).unwrap();
        let expect = [set(&[0]), set(&[4]), set(&[0, 4])]
            .iter()
            .map(|pa| exp(0.1 * pa.bits() as f64))
            .sum::<f64>();
        assert!((got - log(expect)).abs() < 1e-12);
        let diff = t.log_sum_by_difference(node, banned, required).unwrap();
        assert!((got - diff).abs() < 1e-9);
    }

    #[test]
    fn unconstrained_sum_covers_everything() {
        let t = ScoreTable::from_fn(4, 3, |n, pa| (n as f64) - pa.len() as f64);
        let all: f64 = t.entries(1).map(|(_, s)| exp(s)).sum();
        let got = t.log_sum(1, NodeSet::EMPTY, NodeSet::EMPTY).unwrap();
        assert!((got - log(all)).abs() < 1e-12);
    }

    #[test]
    fn empty_family_is_signalled() {
        let t = ScoreTable::from_fn(3, 0, |_, _| 0.0);
        assert_eq!(t.log_sum(0, NodeSet::EMPTY, set(&[1])), None);
        assert_eq!(t.log_sum_by_difference(0, NodeSet::EMPTY, set(&[1])), None);
        assert!(t.sample(0, NodeSet::EMPTY, set(&[1]), &mut <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0)).is_none());
    }

    #[test]
    fn dag_score_is_sum_of_terms() {
        let t = ScoreTable::from_fn(3, 1, |n, pa| n as f64 * 10.0 + pa.bits() as f64);
        let g = Dag::from_edges(3, &[(0, 1)]).unwrap();
        assert_eq!(t.dag_log_score(&g).unwrap(), 0.0 + 11.0 + 20.0);
        let dense = Dag::from_edges(3, &[(0, 2), (1, 2)]).unwrap();
        assert!(matches!(t.dag_log_score(&dense), Err(ScoreError::ParentSetTooLarge { node: 2, .. })));
        assert_eq!(t.dag_log_score(&Dag::empty(3)).unwrap(), 30.0);
    }

    #[test]
    fn best_picks_maximum() {
        let t = ScoreTable::from_fn(4, 2, |_, pa| -((pa.bits() as f64) - 5.0).abs());
        assert_eq!(t.best(3, NodeSet::EMPTY, NodeSet::EMPTY).unwrap().0, set(&[0, 2]));
        assert_eq!(t.best(3, set(&[2]), NodeSet::EMPTY).unwrap().0, set(&[0, 1]));
    }
}
