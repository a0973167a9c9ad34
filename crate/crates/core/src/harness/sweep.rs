use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Algorithm, ProtocolConfig, RngStream};
use crate::protocols::{run_protocol, TraceResult};

use super::stats::mean_sd;
use crate::theory;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    #[serde(rename = "N")]
    pub nodes: usize,
    pub trials: u64,
    pub mean_time: f64,
    pub mean_normalized: f64,
    pub se_normalized: f64,
    pub ratio: f64,
    pub se_ratio: f64,
    pub cap_hits: usize,
}

/// Runs `trials` trials of `config` on streams `first_stream..`, in parallel
/// and returned in stream order.
pub fn run_trials(
    config: &ProtocolConfig,
    seed: u64,
    first_stream: u64,
    trials: u64,
) -> Result<Vec<TraceResult>> {
    (0..trials)
        .into_par_iter()
        .map(|t| run_protocol(config, &mut RngStream::new(seed, first_stream + t)))
        .collect()
}

/// Normalized mean completion time at each `N` of a strictly increasing
/// ladder. Trial `t` at rung `i` uses stream `i·trials + t`, so sweeps of
/// different algorithms with one seed are coupled trial by trial.
pub fn convergence_sweep(
    algorithm: Algorithm,
    p: f64,
    ladder: &[usize],
    trials: u64,
    seed: u64,
) -> Result<Vec<SweepPoint>> {
    if ladder.len() < 3 || ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config(
            "the N ladder needs at least three strictly increasing sizes",
        ));
    }
    if trials == 0 {
        return Err(Error::config("trials must be at least 1"));
    }
    if ladder[0] < 2 {
        return Err(Error::config("normalized time needs N ≥ 2"));
    }
    let c = theory::constant(algorithm, p)?;
    ladder
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let config = ProtocolConfig::new(algorithm, n, p)?;
            let traces = run_trials(&config, seed, i as u64 * trials, trials)?;
            Ok(point(n, c, &traces))
        })
        .collect()
}

fn point(nodes: usize, c: f64, traces: &[TraceResult]) -> SweepPoint {
    let times: Vec<f64> = traces.iter().map(|t| t.completion_time as f64).collect();
    let ln_n = (nodes as f64).ln();
    let (mean_time, sd) = mean_sd(&times);
    let se = sd / (times.len() as f64).sqrt() / ln_n;
    SweepPoint {
        nodes,
        trials: traces.len() as u64,
        mean_time,
        mean_normalized: mean_time / ln_n,
        se_normalized: se,
        ratio: mean_time / ln_n / c,
        se_ratio: se / c,
        cap_hits: traces.iter().filter(|t| t.cap_hit).count(),
    }
}

/// True when each ratio is at most the previous one plus one standard
/// error (of the larger of the two), and the last is at most `limit`.
pub fn nonincreasing_trend(points: &[SweepPoint], limit: f64) -> bool {
    let monotone = points
        .windows(2)
        .all(|w| w[1].ratio <= w[0].ratio + w[0].se_ratio.max(w[1].se_ratio));
    monotone && points.last().is_some_and(|p| p.ratio <= limit)
}
