//! Experiment orchestration for slicenet-core: synthetic topologies,
//! sweep plans, result tables and the `slicenet` subcommands.

pub mod commands;
pub mod error;
pub mod experiment;
pub mod pipeline;
pub mod report;
pub mod topology;

pub use error::{Category, CliError};
pub use experiment::{load_results, run_experiment, write_experiment, ExperimentPlan, ResultRow};
pub use topology::{generate_topology, TopologyKind, TopologyParams};
