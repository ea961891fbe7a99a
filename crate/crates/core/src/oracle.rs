//! Brute-force ground truth for small node counts: DAG enumeration, DAG
//! counts, labelled partitions, exact posteriors and linear-extension counts.

use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::graph::{parents_acyclic, Dag};
use crate::logmath::{exp, log, log_sum_exp};
use crate::nodeset::{subsets_up_to, NodeSet};
use crate::partition::LabelledPartition;
use crate::scoring::ScoreTable;

/// Largest node count accepted by DAG enumeration.
pub const MAX_ENUMERATION_NODES: usize = 6;
/// Largest node count accepted by exact posteriors.
pub const MAX_POSTERIOR_NODES: usize = 5;
/// Largest node count accepted by linear-extension counting.
pub const MAX_LINEAR_EXTENSION_NODES: usize = 20;
/// Largest node count accepted by labelled-partition enumeration.
pub const MAX_PARTITION_NODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("{n} nodes exceeds the limit of {max} for this computation")]
    TooLarge { n: usize, max: usize },
}

fn guard(n: usize, max: usize) -> Result<(), OracleError> {
    if n > max {
        Err(OracleError::TooLarge { n, max })
    } else {
        Ok(())
    }
}

/// Calls `f` once for every DAG on `n` nodes with in-degree at most `max_parents`.
pub fn for_each_dag(n: usize, max_parents: usize, mut f: impl FnMut(&Dag)) -> Result<(), OracleError> {
    guard(n, MAX_ENUMERATION_NODES)?;
    let choices: Vec<Vec<NodeSet>> = (0..n)
        .map(|v| subsets_up_to(NodeSet::full(n).without(v), max_parents))
        .collect();
    let mut parents = alloc::vec![NodeSet::EMPTY; n];
    fn recurse(
        v: usize,
        choices: &[Vec<NodeSet>],
        parents: &mut Vec<NodeSet>,
        f: &mut dyn FnMut(&Dag),
    ) {
        if v == choices.len() {
            f(&Dag::from_parents_unchecked(parents.clone()));
            return;
        }
        for &pa in &choices[v] {
            parents[v] = pa;
            // Nodes not yet assigned have no parents, so any cycle here is final.
            if parents_acyclic(parents) {
                recurse(v + 1, choices, parents, f);
            }
        }
        parents[v] = NodeSet::EMPTY;
    }
    recurse(0, &choices, &mut parents, &mut f);
    Ok(())
}

/// All DAGs on `n <= 6` nodes with in-degree at most `max_parents`.
pub fn enumerate_dags(n: usize, max_parents: usize) -> Result<Vec<Dag>, OracleError> {
    let mut out = Vec::new();
    for_each_dag(n, max_parents, |d| out.push(d.clone()))?;
    Ok(out)
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

fn pow2(e: usize) -> BigUint {
    BigUint::one() << e
}

/// Number of labelled DAGs on `n` nodes, by inclusion–exclusion over the
/// number of outpoints.
pub fn count_dags(n: usize) -> BigUint {
    let mut a: Vec<BigUint> = alloc::vec![BigUint::one()];
    for m in 1..=n {
        let mut pos = BigUint::zero();
        let mut neg = BigUint::zero();
        for k in 1..=m {
            let term = binomial(m, k) * pow2(k * (m - k)) * &a[m - k];
            if k % 2 == 1 {
                pos += term;
            } else {
                neg += term;
            }
        }
        a.push(pos - neg);
    }
    a.swap_remove(n)
}

/// DAGs per labelling of `lambda`: `prod (2^{k_{j+1}} - 1)^{k_j} * prod 2^{k_j S_{j+2}}`.
pub fn dags_per_labelling(lambda: &[usize]) -> BigUint {
    let m = lambda.len();
    let mut acc = BigUint::one();
    for j in 0..m.saturating_sub(1) {
        let base = pow2(lambda[j + 1]) - BigUint::one();
        acc *= base.pow(lambda[j] as u32);
    }
    for j in 0..m.saturating_sub(2) {
        let rest: usize = lambda[j + 2..].iter().sum();
        acc *= pow2(lambda[j] * rest);
    }
    acc
}

/// Multinomial `n! / (k1! .. km!)`: the number of labellings of `lambda`.
pub fn labellings(lambda: &[usize]) -> BigUint {
    let mut left: usize = lambda.iter().sum();
    let mut acc = BigUint::one();
    for &k in lambda {
        acc *= binomial(left, k);
        left -= k;
    }
    acc
}

/// Number of DAGs whose outpoint decomposition has element sizes `lambda`.
pub fn count_dags_in_partition(lambda: &[usize]) -> BigUint {
    labellings(lambda) * dags_per_labelling(lambda)
}

/// All compositions of `n` (ordered partitions into positive parts).
pub fn compositions(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return alloc::vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 1..=n {
        for mut rest in compositions(n - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All labelled partitions of `n <= 8` nodes.
pub fn labelled_partitions(n: usize) -> Result<Vec<LabelledPartition>, OracleError> {
    guard(n, MAX_PARTITION_NODES)?;
    fn recurse(remaining: NodeSet, n: usize, prefix: &mut Vec<NodeSet>, out: &mut Vec<LabelledPartition>) {
        if remaining.is_empty() {
            out.push(LabelledPartition::from_elements_unchecked(n, prefix.clone()));
            return;
        }
        for el in subsets_up_to(remaining, remaining.len()) {
            if el.is_empty() {
                continue;
            }
            prefix.push(el);
            recurse(remaining.difference(el), n, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        recurse(NodeSet::full(n), n, &mut Vec::new(), &mut out);
    }
    Ok(out)
}

/// Number of orders a DAG is consistent with (parents to the right of children).
pub fn count_linear_extensions(dag: &Dag) -> Result<u64, OracleError> {
    let n = dag.n();
    guard(n, MAX_LINEAR_EXTENSION_NODES)?;
    // ways[S]: orderings of the rightmost |S| positions filled by the set S.
    let mut ways = alloc::vec![0u64; 1 << n];
    ways[0] = 1;
    for mask in 0..(1usize << n) {
        let w = ways[mask];
        if w == 0 {
            continue;
        }
        let placed = NodeSet(mask as u64);
        for v in 0..n {
            if !placed.contains(v) && dag.parents(v).is_subset(placed) {
                ways[mask | (1 << v)] += w;
            }
        }
    }
    Ok(ways[(1 << n) - 1])
}

/// Exact normalised posterior over every DAG allowed by a score table.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorTable {
    pub entries: Vec<(Dag, f64)>,
    /// Log of the normalising constant.
    pub log_evidence: f64,
}

impl PosteriorTable {
    /// `[i][j]` is the posterior probability of the edge `j -> i`.
    pub fn edge_probabilities(&self) -> Vec<Vec<f64>> {
        let n = self.entries.first().map_or(0, |(d, _)| d.n());
        let mut out = alloc::vec![alloc::vec![0.0; n]; n];
        for (dag, p) in &self.entries {
            for e in dag.edges() {
                out[e.to][e.from] += p;
            }
        }
        out
    }

    pub fn probability_of(&self, dag: &Dag) -> f64 {
        self.entries.iter().find(|(d, _)| d == dag).map_or(0.0, |(_, p)| *p)
    }

    /// Highest posterior probability.
    pub fn max_probability(&self) -> f64 {
        self.entries.iter().map(|(_, p)| *p).fold(0.0, f64::max)
    }

    /// All DAGs within `rel_tol` of the highest probability; equivalent DAGs tie.
    pub fn argmax(&self, rel_tol: f64) -> Vec<&Dag> {
        let best = self.max_probability();
        self.entries
            .iter()
            .filter(|(_, p)| *p >= best * (1.0 - rel_tol))
            .map(|(d, _)| d)
            .collect()
    }
}

/// Normalises `log_weight(dag)` over every DAG the table allows.
pub fn weighted_posterior(
    table: &ScoreTable,
    mut log_weight: impl FnMut(&Dag) -> f64,
) -> Result<PosteriorTable, OracleError> {
    guard(table.n(), MAX_POSTERIOR_NODES)?;
    let mut dags = Vec::new();
    let mut logs = Vec::new();
    for_each_dag(table.n(), table.max_parents(), |d| {
        logs.push(log_weight(d));
        dags.push(d.clone());
    })?;
    let log_evidence = log_sum_exp(&logs);
    let entries = dags
        .into_iter()
        .zip(logs)
        .map(|(d, l)| (d, exp(l - log_evidence)))
        .collect();
    Ok(PosteriorTable { entries, log_evidence })
}

/// Exact posterior `P(G | D)` under a uniform graph prior, `n <= 5`.
pub fn exact_posterior(table: &ScoreTable) -> Result<PosteriorTable, OracleError> {
    weighted_posterior(table, |d| table.dag_log_score(d).expect("enumerated within the limit"))
}

/// The DAG law order MCMC targets: the posterior times the number of
/// consistent orders, renormalised.
pub fn order_weighted_posterior(table: &ScoreTable) -> Result<PosteriorTable, OracleError> {
    weighted_posterior(table, |d| {
        let w = count_linear_extensions(d).expect("small graph");
        table.dag_log_score(d).expect("enumerated within the limit") + log(w as f64)
    })
}
