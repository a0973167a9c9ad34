use serde::{Deserialize, Serialize};

use crate::network::ProtocolConfig;

/// First rounds at which the informed count reached `εpN` and `(1−ε)pN`.
/// A threshold above `n` is never reached and stays `None`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageTimes {
    pub t_eps: Option<u64>,
    pub t_one_minus_eps: Option<u64>,
}

/// Phase-2 bookkeeping of the improved cyclic protocol.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImprovedStats {
    pub segment_length: usize,
    pub segment_count: usize,
    pub good_threshold: usize,
    pub good_segments: usize,
    /// Phase-2 round by which every segment had finished its
    /// intra-segment broadcast.
    pub phase2a_steps: u64,
    /// Rounds spent in phase 2. Segments start sweeping as soon as their own
    /// census is in, so the two parts overlap.
    pub phase2_steps: u64,
    /// Most rounds any wave spent on a single segment.
    pub longest_segment_sweep: u64,
    /// Every completed segment sweep took at most `ceil(ℓ/g)` rounds for
    /// its sender count `g`.
    pub sweeps_within_bound: bool,
}

/// Outcome of one protocol run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceResult {
    pub config: ProtocolConfig,
    pub n_active: usize,
    /// `T_n`; equals the clock at the cap when `cap_hit` is set.
    pub completion_time: u64,
    pub cap_hit: bool,
    pub phase1_end: Option<u64>,
    pub stage_times: StageTimes,
    /// `k_t` for `t = 0..=completion_time`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trajectory: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub improved: Option<ImprovedStats>,
}

impl TraceResult {
    pub fn completed(&self) -> bool {
        !self.cap_hit
    }

    /// `T_n / ln N`, undefined for a single node.
    pub fn normalized_time(&self) -> Option<f64> {
        let ln_n = (self.config.nodes as f64).ln();
        (ln_n > 0.0).then(|| self.completion_time as f64 / ln_n)
    }

    /// Durations of the three analysis stages when both thresholds were
    /// reached: `[T_εpN, T_(1−ε)pN − T_εpN, T_n − T_(1−ε)pN]`.
    pub fn stage_durations(&self) -> Option<[u64; 3]> {
        let a = self.stage_times.t_eps?;
        let b = self.stage_times.t_one_minus_eps?;
        if self.cap_hit {
            return None;
        }
        Some([a, b - a, self.completion_time - b])
    }
}
