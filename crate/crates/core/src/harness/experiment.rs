use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Algorithm, RngStream};
use crate::protocols::{Simulation, TraceResult};

use super::spec::{ExperimentSpec, OutputFormat};
use super::stats::SummaryStats;

/// Largest `N` for which trajectories are kept.
pub const TRAJECTORY_MAX_N: usize = 1 << 16;

/// One raw output row; field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial_id: u64,
    pub algorithm: Algorithm,
    #[serde(rename = "N")]
    pub nodes: usize,
    pub p: f64,
    pub seed: u64,
    pub stream_id: u64,
    pub n_active: usize,
    pub phase1_end: Option<u64>,
    pub t_eps: Option<u64>,
    pub t_one_minus_eps: Option<u64>,
    #[serde(rename = "T_n")]
    pub completion_time: u64,
    pub cap_hit: bool,
}

impl TrialRow {
    fn new(trial_id: u64, stream_id: u64, seed: u64, trace: &TraceResult) -> Self {
        TrialRow {
            trial_id,
            algorithm: trace.config.algorithm,
            nodes: trace.config.nodes,
            p: trace.config.p,
            seed,
            stream_id,
            n_active: trace.n_active,
            phase1_end: trace.phase1_end,
            t_eps: trace.stage_times.t_eps,
            t_one_minus_eps: trace.stage_times.t_one_minus_eps,
            completion_time: trace.completion_time,
            cap_hit: trace.cap_hit,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    #[default]
    Parallel,
    Serial,
}

/// Everything an experiment produced, in grid and trial order.
#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub rows: Vec<TrialRow>,
    pub traces: Vec<TraceResult>,
    pub summaries: Vec<SummaryStats>,
}

#[derive(Serialize)]
struct JsonTrial<'a> {
    #[serde(flatten)]
    row: &'a TrialRow,
    #[serde(skip_serializing_if = "Option::is_none")]
    trajectory: Option<&'a Vec<u64>>,
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    summaries: &'a [SummaryStats],
    trials: Vec<JsonTrial<'a>>,
}

impl ExperimentOutput {
    /// The persisted bytes in the given format.
    pub fn render(&self, format: OutputFormat) -> Result<Vec<u8>> {
        match format {
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                for row in &self.rows {
                    w.serialize(row)?;
                }
                w.into_inner().map_err(|e| Error::Io(e.into_error()))
            }
            OutputFormat::Json => {
                let doc = JsonDocument {
                    summaries: &self.summaries,
                    trials: self
                        .rows
                        .iter()
                        .zip(&self.traces)
                        .map(|(row, trace)| JsonTrial {
                            row,
                            trajectory: trace.trajectory.as_ref(),
                        })
                        .collect(),
                };
                let mut bytes = serde_json::to_vec_pretty(&doc)?;
                bytes.push(b'\n');
                Ok(bytes)
            }
        }
    }
}

/// Runs every trial of `spec` without touching the disk.
pub fn execute(spec: &ExperimentSpec, execution: Execution) -> Result<ExperimentOutput> {
    spec.validate()?;
    let configs = (0..spec.grid.len())
        .map(|i| spec.cell_config(i))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, u64)> = (0..configs.len())
        .flat_map(|c| (0..spec.trials_per_cell).map(move |t| (c, t)))
        .collect();

    let run = |&(cell, trial): &(usize, u64)| -> Result<TraceResult> {
        let config = &configs[cell];
        let mut rng = RngStream::new(spec.base_seed, spec.stream_id(cell, trial));
        let keep = spec.record_trajectory && config.nodes <= TRAJECTORY_MAX_N;
        Ok(Simulation::new(config)
            .record_trajectory(keep)
            .run(&mut rng)?
            .trace)
    };
    let traces: Vec<TraceResult> = match execution {
        Execution::Parallel => jobs.par_iter().map(run).collect::<Result<_>>()?,
        Execution::Serial => jobs.iter().map(run).collect::<Result<_>>()?,
    };

    let rows = jobs
        .iter()
        .zip(&traces)
        .map(|(&(cell, trial), trace)| {
            TrialRow::new(trial, spec.stream_id(cell, trial), spec.base_seed, trace)
        })
        .collect();
    let per_cell = spec.trials_per_cell as usize;
    let summaries = configs
        .iter()
        .zip(traces.chunks(per_cell))
        .map(|(config, chunk)| SummaryStats::from_traces(config, chunk))
        .collect();
    Ok(ExperimentOutput {
        rows,
        traces,
        summaries,
    })
}

/// Runs `spec`, writes its raw trials to `spec.output_path` and returns the
/// per-cell summaries. Nothing is written unless every trial succeeded.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<SummaryStats>> {
    let output = execute(spec, Execution::Parallel)?;
    write_atomic(&spec.output_path, &output.render(spec.format)?)?;
    Ok(output.summaries)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let fail = |source| Error::Output {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.flush().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}
