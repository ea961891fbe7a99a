//! Experiment orchestration: one score table, several seeded chains, and the
//! files summarising them.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use dagmc_core::chain::{edge_posterior, ChainError, DEFAULT_P_REV};
use dagmc_core::oracle::exact_posterior;
use dagmc_core::order::run_order_chain;
use dagmc_core::partition_mcmc::run_partition_chain;
use dagmc_core::structure::run_structure_chain;
use dagmc_core::{BgeParams, ChainConfig, ChainTrace, Dag, DataSet, LabelledPartition, MoveKind, NodeOrder, ScoreTable};

use crate::io::{self, IoError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Sampler {
    Structure,
    StructureRev,
    Order,
    Partition,
    PartitionRev,
}

impl Sampler {
    pub const ALL: [Sampler; 5] =
        [Sampler::Structure, Sampler::StructureRev, Sampler::Order, Sampler::Partition, Sampler::PartitionRev];

    pub fn name(self) -> &'static str {
        match self {
            Sampler::Structure => "structure",
            Sampler::StructureRev => "structure-rev",
            Sampler::Order => "order",
            Sampler::Partition => "partition",
            Sampler::PartitionRev => "partition-rev",
        }
    }

    pub fn uses_rev(self) -> bool {
        matches!(self, Sampler::StructureRev | Sampler::PartitionRev)
    }
}

impl fmt::Display for Sampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Sampler {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Sampler::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| ExperimentError::Config(format!("unknown sampler {s:?}")))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Score(#[from] dagmc_core::ScoreError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<std::io::Error> for ExperimentError {
    fn from(e: std::io::Error) -> Self {
        ExperimentError::Io(IoError::Io(e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub sampler: Sampler,
    pub max_parents: usize,
    pub steps: usize,
    pub chains: usize,
    /// Chain `i` is seeded with `seed + i`.
    pub seed: u64,
    pub thin: usize,
    pub burn_in_fraction: f64,
    /// Edge reversal probability; defaults to 0.07 for the `-rev` samplers and 0 otherwise.
    pub p_rev: Option<f64>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            sampler: Sampler::Partition,
            max_parents: 4,
            steps: 10_000,
            chains: 1,
            seed: 1,
            thin: 10,
            burn_in_fraction: 0.2,
            p_rev: None,
        }
    }
}

impl ExperimentSpec {
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.chains as u64).map(|i| self.seed.wrapping_add(i)).collect()
    }

    pub fn chain_config(&self) -> Result<ChainConfig, ExperimentError> {
        if self.chains == 0 {
            return Err(ExperimentError::Config("at least one chain is required".into()));
        }
        let p_rev = if self.sampler.uses_rev() { self.p_rev.unwrap_or(DEFAULT_P_REV) } else { 0.0 };
        if !self.sampler.uses_rev() && self.p_rev.is_some_and(|p| p > 0.0) {
            return Err(ExperimentError::Config(format!(
                "sampler {} does not use edge reversal; choose structure-rev or partition-rev",
                self.sampler
            )));
        }
        let config = ChainConfig {
            steps: self.steps,
            thin: self.thin,
            burn_in_fraction: self.burn_in_fraction,
            p_rev,
            ..ChainConfig::default()
        };
        config.validate()?;
        Ok(config)
    }
}

/// Runs one chain of `sampler` from its default initial state.
pub fn run_chain(
    sampler: Sampler,
    table: &ScoreTable,
    config: &ChainConfig,
    seed: u64,
) -> Result<ChainTrace, ChainError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = table.n();
    match sampler {
        Sampler::Structure | Sampler::StructureRev => run_structure_chain(Dag::empty(n), table, config, &mut rng),
        Sampler::Order => {
            let init = NodeOrder::random(n, &mut rng);
            run_order_chain(init, table, config, &mut rng)
        }
        Sampler::Partition | Sampler::PartitionRev => {
            run_partition_chain(LabelledPartition::single(n), table, config, &mut rng)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainResult {
    pub seed: u64,
    pub trace: ChainTrace,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub names: Vec<String>,
    pub chains: Vec<ChainResult>,
    pub edge_posterior: Vec<Vec<f64>>,
    /// Largest absolute edge-posterior error against the exact posterior, when computed.
    pub exact_deviation: Option<f64>,
    pub table_seconds: f64,
}

impl ExperimentResult {
    pub fn traces(&self) -> Vec<ChainTrace> {
        self.chains.iter().map(|c| c.trace.clone()).collect()
    }

    /// Highest sampled-DAG score of each chain.
    pub fn best_scores(&self) -> Vec<f64> {
        self.chains.iter().map(|c| c.trace.best_dag_log_score()).collect()
    }
}

pub fn build_table(data: &DataSet, max_parents: usize) -> Result<ScoreTable, ExperimentError> {
    if max_parents >= data.n_vars() {
        return Err(ExperimentError::Config(format!(
            "max parents {max_parents} must be below the number of variables {}",
            data.n_vars()
        )));
    }
    Ok(ScoreTable::build(data, max_parents, &BgeParams::default())?)
}

/// Largest absolute difference between two edge matrices.
pub fn max_edge_deviation(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

/// Runs every chain of `spec` on a prebuilt table.
pub fn run_with_table(
    spec: &ExperimentSpec,
    table: &ScoreTable,
    names: Vec<String>,
) -> Result<ExperimentResult, ExperimentError> {
    let config = spec.chain_config()?;
    let chains = spec
        .seeds()
        .into_par_iter()
        .map(|seed| {
            let start = Instant::now();
            let trace = run_chain(spec.sampler, table, &config, seed)?;
            Ok(ChainResult { seed, trace, seconds: start.elapsed().as_secs_f64() })
        })
        .collect::<Result<Vec<_>, ChainError>>()?;
    let traces: Vec<ChainTrace> = chains.iter().map(|c| c.trace.clone()).collect();
    let edge_posterior = edge_posterior(&traces, table.n())?;
    Ok(ExperimentResult { spec: spec.clone(), names, chains, edge_posterior, exact_deviation: None, table_seconds: 0.0 })
}

/// Builds the score table from `data` and runs the experiment.
pub fn run_experiment(spec: &ExperimentSpec, data: &DataSet) -> Result<ExperimentResult, ExperimentError> {
    spec.chain_config()?;
    let start = Instant::now();
    let table = build_table(data, spec.max_parents)?;
    let table_seconds = start.elapsed().as_secs_f64();
    let mut result = run_with_table(spec, &table, data.names().to_vec())?;
    result.table_seconds = table_seconds;
    Ok(result)
}

/// Adds the deviation from the exact posterior (five nodes or fewer).
pub fn compare_with_exact(result: &mut ExperimentResult, data: &DataSet) -> Result<f64, ExperimentError> {
    let table = build_table(data, result.spec.max_parents)?;
    let exact = exact_posterior(&table).map_err(|e| ExperimentError::Config(e.to_string()))?;
    let dev = max_edge_deviation(&result.edge_posterior, &exact.edge_probabilities());
    result.exact_deviation = Some(dev);
    Ok(dev)
}

#[derive(Debug, Serialize)]
struct MoveSummary {
    kind: &'static str,
    proposed: u64,
    accepted: u64,
}

#[derive(Debug, Serialize)]
struct ChainManifest {
    seed: u64,
    trace: String,
    dags: String,
    best_dag_log_score: f64,
    best_state_log_score: f64,
    rescored_nodes: u64,
    seconds: f64,
    moves: Vec<MoveSummary>,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    spec: &'a ExperimentSpec,
    version: &'static str,
    core_version: &'static str,
    table_seconds: f64,
    exact_max_edge_deviation: Option<f64>,
    chains: Vec<ChainManifest>,
}

/// Writes per-chain traces and DAGs, best scores, the edge posterior and a JSON manifest.
pub fn write_outputs(result: &ExperimentResult, out_dir: &Path) -> Result<(), ExperimentError> {
    fs::create_dir_all(out_dir)?;
    let mut chains = Vec::new();
    let mut best = csv::Writer::from_path(out_dir.join("best_scores.csv")).map_err(IoError::from)?;
    best.write_record(["chain", "seed", "best_dag_log_score", "best_state_log_score"]).map_err(IoError::from)?;
    for (i, c) in result.chains.iter().enumerate() {
        let trace_name = format!("chain_{i}_trace.csv");
        let dags_name = format!("chain_{i}_dags.txt");
        io::write_trace(fs::File::create(out_dir.join(&trace_name))?, &c.trace)?;
        fs::write(out_dir.join(&dags_name), io::format_trace_dags(&c.trace))?;
        best.write_record([
            i.to_string(),
            c.seed.to_string(),
            format!("{:.16e}", c.trace.best_dag_log_score()),
            format!("{:.16e}", c.trace.best_state_log_score()),
        ])
        .map_err(IoError::from)?;
        chains.push(ChainManifest {
            seed: c.seed,
            trace: trace_name,
            dags: dags_name,
            best_dag_log_score: c.trace.best_dag_log_score(),
            best_state_log_score: c.trace.best_state_log_score(),
            rescored_nodes: c.trace.stats.rescored_nodes,
            seconds: c.seconds,
            moves: MoveKind::ALL
                .iter()
                .filter(|k| c.trace.stats.proposed(**k) > 0)
                .map(|&k| MoveSummary {
                    kind: k.name(),
                    proposed: c.trace.stats.proposed(k),
                    accepted: c.trace.stats.accepted(k),
                })
                .collect(),
        });
    }
    best.flush()?;
    io::write_edge_posterior(fs::File::create(out_dir.join("edge_posterior.csv"))?, &result.names, &result.edge_posterior)?;
    let manifest = Manifest {
        spec: &result.spec,
        version: env!("CARGO_PKG_VERSION"),
        core_version: dagmc_core::VERSION,
        table_seconds: result.table_seconds,
        exact_max_edge_deviation: result.exact_deviation,
        chains,
    };
    fs::write(out_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}
