//! Data simulation, file formats, experiment orchestration and MAP search
//! on top of [`dagmc_core`].

pub mod experiment;
pub mod io;
pub mod search;
pub mod simulate;

pub use experiment::{run_experiment, ExperimentSpec, Sampler};
pub use io::IoError;
pub use simulate::{generate_random_dag, simulate_data, SimulationSpec};
