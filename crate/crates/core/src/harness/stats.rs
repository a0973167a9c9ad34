use serde::{Deserialize, Serialize};

use crate::network::{Algorithm, ProtocolConfig};
use crate::protocols::TraceResult;
use crate::theory;

/// Linear-interpolation quantile of sorted data (the usual "type 7" rule).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Sample mean and standard deviation (`n−1` denominator, 0 for one value).
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Aggregates of one grid cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub algorithm: Algorithm,
    #[serde(rename = "N")]
    pub nodes: usize,
    pub p: f64,
    pub trials: usize,
    pub mean: f64,
    pub stddev: f64,
    pub min: f64,
    pub max: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
    /// Mean of `T_n / ln N`; `None` for `N = 1`.
    pub mean_normalized: Option<f64>,
    /// Standard error of `mean_normalized`.
    pub se_normalized: Option<f64>,
    pub theory_constant: f64,
    pub ratio: Option<f64>,
    /// Means of the three stage durations over trials that reached both
    /// thresholds.
    pub stage_means: Option<[f64; 3]>,
    pub stage_trials: usize,
    /// `ln(εpN)/ln(1+p)`, for reading the first stage mean against.
    pub nominal_stage1: Option<f64>,
    pub cap_hits: usize,
}

impl SummaryStats {
    pub fn from_traces(config: &ProtocolConfig, traces: &[TraceResult]) -> Self {
        assert!(!traces.is_empty(), "summary of zero trials");
        let mut times: Vec<f64> = traces.iter().map(|t| t.completion_time as f64).collect();
        let (mean, stddev) = mean_sd(&times);
        times.sort_by(f64::total_cmp);

        let normalized: Option<Vec<f64>> = traces.iter().map(|t| t.normalized_time()).collect();
        let (mean_normalized, se_normalized) = match &normalized {
            Some(xs) => {
                let (m, sd) = mean_sd(xs);
                (Some(m), Some(sd / (xs.len() as f64).sqrt()))
            }
            None => (None, None),
        };
        let theory_constant =
            theory::constant(config.algorithm, config.p).expect("validated config has p in (0, 1]");
        let cap_hits = traces.iter().filter(|t| t.cap_hit).count();
        let ratio = mean_normalized
            .filter(|_| cap_hits == 0)
            .map(|m| m / theory_constant)
            .filter(|r| r.is_finite());

        let stages: Vec<[u64; 3]> = traces.iter().filter_map(|t| t.stage_durations()).collect();
        let stage_means = (!stages.is_empty()).then(|| {
            let n = stages.len() as f64;
            let mut sums = [0.0; 3];
            for s in &stages {
                for (acc, &d) in sums.iter_mut().zip(s) {
                    *acc += d as f64;
                }
            }
            sums.map(|x| x / n)
        });
        let (eps_pn, _) = config.stage_thresholds();
        let nominal_stage1 = (eps_pn > 1.0).then(|| eps_pn.ln() / config.p.ln_1p());

        SummaryStats {
            algorithm: config.algorithm,
            nodes: config.nodes,
            p: config.p,
            trials: traces.len(),
            mean,
            stddev,
            min: times[0],
            max: times[times.len() - 1],
            q05: quantile(&times, 0.05),
            q50: quantile(&times, 0.5),
            q95: quantile(&times, 0.95),
            mean_normalized,
            se_normalized,
            theory_constant,
            ratio,
            stage_means,
            stage_trials: stages.len(),
            nominal_stage1,
            cap_hits,
        }
    }
}
