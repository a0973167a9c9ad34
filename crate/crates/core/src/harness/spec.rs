use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Algorithm, ProtocolConfig};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputFormat {
    #[default]
    #[serde(rename = "CSV", alias = "csv")]
    Csv,
    #[serde(rename = "JSON", alias = "json")]
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cell {
    pub algorithm: Algorithm,
    #[serde(rename = "N")]
    pub nodes: usize,
    pub p: f64,
}

/// A grid of `(algorithm, N, p)` cells, each run `trials_per_cell` times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub grid: Vec<Cell>,
    pub trials_per_cell: u64,
    pub base_seed: u64,
    pub record_trajectory: bool,
    pub epsilon: f64,
    pub output_path: PathBuf,
    pub format: OutputFormat,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::config("grid is empty"));
        }
        if self.trials_per_cell == 0 {
            return Err(Error::config("trials_per_cell must be at least 1"));
        }
        if self
            .trials_per_cell
            .checked_mul(self.grid.len() as u64)
            .is_none()
        {
            return Err(Error::config("grid × trials_per_cell overflows"));
        }
        for i in 0..self.grid.len() {
            self.cell_config(i)?;
        }
        Ok(())
    }

    /// The protocol configuration of cell `index`.
    pub fn cell_config(&self, index: usize) -> Result<ProtocolConfig> {
        let cell = &self.grid[index];
        let config =
            ProtocolConfig::new(cell.algorithm, cell.nodes, cell.p)?.with_epsilon(self.epsilon);
        config.validate()?;
        Ok(config)
    }

    /// Stream id of trial `trial` in cell `cell`.
    pub fn stream_id(&self, cell: usize, trial: u64) -> u64 {
        cell as u64 * self.trials_per_cell + trial
    }
}
