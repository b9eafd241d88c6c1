//! Configuration-driven experiment runner for `lindley2d-core`.
//!
//! One experiment is one configuration file and one output directory
//! holding `config.json` (the fully resolved configuration, seed
//! included), `results.csv` and `report.json`. Replaying `config.json`
//! reproduces all three files byte for byte, for any worker count.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod runner;

use serde::{Deserialize, Serialize};

pub use artifacts::{write_artifacts, ErrorRecord, Report, Status, SCHEMA_VERSION};
pub use commands::{run_command, Outcome, RunError, Table};
pub use config::{ConfigError, ExperimentConfig};
pub use runner::ParallelRunner;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Classify,
    Tail,
    Harmonic,
    Lyapunov,
    Duality,
    Occupation,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Tail => "tail",
            Command::Harmonic => "harmonic",
            Command::Lyapunov => "lyapunov",
            Command::Duality => "duality",
            Command::Occupation => "occupation",
        }
    }
}
