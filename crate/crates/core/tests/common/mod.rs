#![allow(dead_code)]

use dagmc_core::{BgeParams, DataSet, NodeSet, ScoreTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn set(nodes: &[usize]) -> NodeSet {
    nodes.iter().copied().collect()
}

/// Linear Gaussian data from a lower-triangular mixing matrix.
pub fn random_data(n: usize, n_obs: usize, seed: u64) -> DataSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..i).map(|_| if rng.random::<f64>() < 0.5 { rng.random_range(-1.5..1.5) } else { 0.0 }).collect())
        .collect();
    let rows: Vec<Vec<f64>> = (0..n_obs)
        .map(|_| {
            let mut x = vec![0.0; n];
            for i in 0..n {
                let noise: f64 = rng.sample(StandardNormal);
                x[i] = noise + (0..i).map(|j| weights[i][j] * x[j]).sum::<f64>();
            }
            x
        })
        .collect();
    DataSet::from_rows(&rows).unwrap()
}

pub fn bge_table(n: usize, max_parents: usize, n_obs: usize, seed: u64) -> ScoreTable {
    ScoreTable::build(&random_data(n, n_obs, seed), max_parents, &BgeParams::default()).unwrap()
}

/// Arbitrary positive scores with no structure.
pub fn arbitrary_table(n: usize, max_parents: usize, seed: u64) -> ScoreTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ScoreTable::from_fn(n, max_parents, |_, _| rng.random_range(-3.0..3.0))
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
