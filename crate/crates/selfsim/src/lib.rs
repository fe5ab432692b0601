//! Batch front end: experiment configs in, verdict reports out.

pub mod commands;
pub mod dto;
pub mod error;
pub mod parallel;
pub mod report;

use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub use commands::Command;
pub use error::CliError;
pub use report::{emit, Format, Metadata, Report, Row, Table};

use parallel::Pool;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: String,
    #[serde(default = "empty_object")]
    pub params: Value,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output_path: Option<String>,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }
}

/// Hex SHA-256 of the canonical JSON of what determines the result.
pub fn config_hash(command: &str, params: &Value, seed: u64) -> String {
    let canonical = json!({ "command": command, "params": params, "seed": seed });
    let digest = Sha256::digest(canonical.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Validate `config` and run it. `seed` overrides the config's seed, which
/// defaults to 0. `workers = 0` uses every core.
pub fn execute(config: &ExperimentConfig, seed: Option<u64>, workers: usize) -> Result<Report, CliError> {
    let command: Command = config.command.parse()?;
    let seed = seed.or(config.seed).unwrap_or(0);
    let pool = Pool::new(workers)?;
    let start = Instant::now();
    let out = commands::run(command, &config.params, seed, &pool)?;
    Ok(Report {
        rows: out.rows,
        tables: out.tables,
        metadata: Metadata {
            command: command.name().into(),
            config: config.params.clone(),
            config_hash: config_hash(command.name(), &config.params, seed),
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
            workers: pool.workers(),
            wall_time_ms: start.elapsed().as_millis() as u64,
        },
    })
}
