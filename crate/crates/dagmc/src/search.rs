//! Parallel restarts of the annealed order search.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use dagmc_core::map_search::{anneal_orders, summarise, MapSearchConfig, MapSearchReport};
use dagmc_core::{NodeOrder, ScoreTable};

/// Runs `config.restarts` searches, restart `i` seeded with `seed + i`.
pub fn run_map_search(table: &ScoreTable, config: &MapSearchConfig, seed: u64) -> MapSearchReport {
    let runs = (0..config.restarts.max(1) as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i));
            let init = NodeOrder::random(table.n(), &mut rng);
            anneal_orders(init, table, config, &mut rng)
        })
        .collect();
    summarise(table, runs, config.tie_tolerance)
}
