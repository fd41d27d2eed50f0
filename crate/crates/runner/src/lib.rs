//! Batch experiment runner for `dyadic-lab`: versioned JSON configs, seeded
//! randomness, result records with invariant verdicts, and the acceptance
//! suite.

pub mod acceptance;
pub mod args;
pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{
    Experiment, ExperimentConfig, FunctionSource, GridParams, OutputPaths, SpaceConfig, SymbolSource, Tolerances, WeightSource,
    CONFIG_VERSION,
};
pub use error::{RunError, RunResult};
pub use output::Format;
pub use run::{read_grid_function, run, InvariantCheck, ResultRecord};
