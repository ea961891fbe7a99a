//! Synthetic Gaussian data from linear structural equation models.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use dagmc_core::{Dag, DataSet, NodeSet};

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSpec {
    pub dag: Dag,
    pub n_obs: usize,
    /// Regression coefficient on every parent.
    pub coefficient: f64,
    pub noise_sd: f64,
}

impl SimulationSpec {
    pub fn new(dag: Dag, n_obs: usize) -> Self {
        SimulationSpec { dag, n_obs, coefficient: 2.0, noise_sd: 1.0 }
    }
}

/// Each node is `coefficient * (sum of its parents) + N(0, noise_sd^2)`.
pub fn simulate_data<R: Rng + ?Sized>(spec: &SimulationSpec, rng: &mut R) -> DataSet {
    let n = spec.dag.n();
    let order = spec.dag.topological_order();
    let noise = Normal::new(0.0, spec.noise_sd).expect("finite noise scale");
    let mut values = vec![0.0; spec.n_obs * n];
    for row in values.chunks_mut(n.max(1)).take(spec.n_obs) {
        for &v in &order {
            let parents: f64 = spec.dag.parents(v).iter().map(|p| row[p]).sum();
            row[v] = spec.coefficient * parents + noise.sample(rng);
        }
    }
    let names = (1..=n).map(|i| format!("X{i}")).collect();
    DataSet::new(n, values, names).expect("simulated values are finite")
}

/// Uniform lower-triangular 0/1 adjacency, parents trimmed at random down to
/// `max_parents`, then relabelled by a uniform permutation.
pub fn generate_random_dag<R: Rng + ?Sized>(n: usize, max_parents: usize, rng: &mut R) -> Dag {
    let mut parents = vec![NodeSet::EMPTY; n];
    for (i, pa) in parents.iter_mut().enumerate() {
        for j in 0..i {
            if rng.random::<bool>() {
                pa.insert(j);
            }
        }
        if pa.len() > max_parents {
            let mut members: Vec<usize> = pa.iter().collect();
            members.shuffle(rng);
            *pa = members[..max_parents].iter().copied().collect();
        }
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut relabelled = vec![NodeSet::EMPTY; n];
    for (i, pa) in parents.iter().enumerate() {
        relabelled[perm[i]] = pa.iter().map(|j| perm[j]).collect();
    }
    Dag::from_parents(relabelled).expect("relabelled triangular graph is acyclic")
}
