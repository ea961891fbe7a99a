use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dagmc::experiment::{build_table, compare_with_exact, run_experiment, write_outputs, ExperimentSpec, Sampler};
use dagmc::io;
use dagmc::search::run_map_search;
use dagmc::simulate::{generate_random_dag, simulate_data, SimulationSpec};
use dagmc_core::map_search::{AnnealSchedule, MapSearchConfig};
use dagmc_core::oracle::{compositions, count_dags, count_dags_in_partition, exact_posterior, labellings};

#[derive(Parser)]
#[command(name = "dagmc", version, about = "MCMC sampling of Bayesian network structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate Gaussian data from a given or random DAG.
    Simulate(SimulateArgs),
    /// Write the table of parent-set scores.
    ScoreTable(TableArgs),
    /// Run one or more MCMC chains.
    Run(RunArgs),
    /// Exact posterior by enumeration (five nodes or fewer).
    Exact(TableArgs),
    /// Annealed order search for the highest-scoring DAG.
    MapSearch(MapArgs),
    /// Number of DAGs, in total and per partition shape.
    Counts {
        #[arg(long)]
        n: usize,
    },
}

#[derive(Args)]
struct SimulateArgs {
    /// DAG file; a random DAG is drawn when absent.
    #[arg(long)]
    dag: Option<PathBuf>,
    /// Number of nodes for the random DAG.
    #[arg(long, required_unless_present = "dag")]
    n: Option<usize>,
    #[arg(long, default_value_t = 4)]
    max_parents: usize,
    #[arg(long, default_value_t = 100)]
    obs: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 4)]
    max_parents: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 4)]
    max_parents: usize,
    #[arg(long, value_enum, default_value_t = Sampler::Partition)]
    sampler: Sampler,
    #[arg(long, default_value_t = 10_000)]
    steps: usize,
    #[arg(long, default_value_t = 1)]
    chains: usize,
    /// Base seed; chain i uses seed + i.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    thin: usize,
    /// Fraction of each chain discarded as burn-in.
    #[arg(long, default_value_t = 0.2)]
    burn_in: f64,
    #[arg(long)]
    p_rev: Option<f64>,
    /// Report the largest edge error against the exact posterior.
    #[arg(long)]
    compare_exact: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MapArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 4)]
    max_parents: usize,
    #[arg(long, default_value_t = 100)]
    restarts: usize,
    #[arg(long, default_value_t = 5000)]
    steps: usize,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1.2)]
    rate: f64,
    #[arg(long, default_value_t = 1000)]
    block: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let dag = match (&args.dag, args.n) {
        (Some(path), _) => io::read_dag(path)?,
        (None, Some(n)) => {
            if n == 0 || n > 64 {
                bail!("node count must lie in 1..=64");
            }
            generate_random_dag(n, args.max_parents, &mut rng)
        }
        (None, None) => bail!("either --dag or --n is required"),
    };
    let data = simulate_data(&SimulationSpec::new(dag.clone(), args.obs), &mut rng);
    fs::create_dir_all(&args.out)?;
    io::write_data(fs::File::create(args.out.join("data.csv"))?, &data)?;
    io::write_dag(&args.out.join("dag.txt"), &dag)?;
    Ok(())
}

fn score_table(args: TableArgs) -> Result<()> {
    let data = io::load_csv(&args.data)?;
    let table = build_table(&data, args.max_parents)?;
    io::write_score_table(fs::File::create(&args.out)?, &table)?;
    Ok(())
}

fn run(args: RunArgs) -> Result<()> {
    let data = io::load_csv(&args.data)?;
    let spec = ExperimentSpec {
        sampler: args.sampler,
        max_parents: args.max_parents,
        steps: args.steps,
        chains: args.chains,
        seed: args.seed,
        thin: args.thin,
        burn_in_fraction: args.burn_in,
        p_rev: args.p_rev,
    };
    let mut result = run_experiment(&spec, &data)?;
    if args.compare_exact {
        let dev = compare_with_exact(&mut result, &data)?;
        println!("max edge deviation from exact posterior: {dev:.6}");
    }
    write_outputs(&result, &args.out)?;
    Ok(())
}

fn exact(args: TableArgs) -> Result<()> {
    let data = io::load_csv(&args.data)?;
    let table = build_table(&data, args.max_parents)?;
    let post = exact_posterior(&table)?;
    fs::create_dir_all(&args.out)?;
    io::write_edge_posterior(fs::File::create(args.out.join("edge_posterior.csv"))?, data.names(), &post.edge_probabilities())?;
    io::write_posterior_table(fs::File::create(args.out.join("posterior.txt"))?, &post)?;
    Ok(())
}

fn map_search(args: MapArgs) -> Result<()> {
    let data = io::load_csv(&args.data)?;
    let table = build_table(&data, args.max_parents)?;
    let config = MapSearchConfig {
        steps: args.steps,
        restarts: args.restarts,
        schedule: AnnealSchedule { gamma0: args.gamma, rate: args.rate, block: args.block },
        ..MapSearchConfig::default()
    };
    let report = run_map_search(&table, &config, args.seed);
    fs::create_dir_all(&args.out)?;
    io::write_dag(&args.out.join("best_dag.txt"), &report.best_dag)?;
    let summary = serde_json::json!({
        "best_score": report.best_score,
        "restarts": report.restart_scores.len(),
        "hits": report.hits,
        "p_star": report.p_star,
        "miss_bound": report.miss_bound,
        "adjusted_miss_bound": report.adjusted_miss_bound,
        "restart_scores": report.restart_scores,
    });
    fs::write(args.out.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    println!("best score {:.6}, {} of {} restarts, miss bound {:.3e}", report.best_score, report.hits, report.restart_scores.len(), report.miss_bound);
    Ok(())
}

fn counts(n: usize) -> Result<()> {
    if n == 0 || n > 64 {
        bail!("node count must lie in 1..=64");
    }
    println!("dags {}", count_dags(n));
    for lambda in compositions(n) {
        let shape: Vec<String> = lambda.iter().map(|k| k.to_string()).collect();
        println!("{} labellings {} dags {}", shape.join(","), labellings(&lambda), count_dags_in_partition(&lambda));
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate(a).context("simulate"),
        Command::ScoreTable(a) => score_table(a).context("score-table"),
        Command::Run(a) => run(a).context("run"),
        Command::Exact(a) => exact(a).context("exact"),
        Command::MapSearch(a) => map_search(a).context("map-search"),
        Command::Counts { n } => counts(n),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
