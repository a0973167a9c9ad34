//! Network state and active-set sampling.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed-length bitset over node indices.
#[derive(Clone, PartialEq, Eq)]
pub struct Bitmap {
    words: Vec<u64>,
    len: usize,
}

impl Bitmap {
    pub fn new(len: usize) -> Self {
        Bitmap {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn full(len: usize) -> Self {
        let mut map = Bitmap {
            words: vec![u64::MAX; len.div_ceil(64)],
            len,
        };
        map.clear_tail();
        map
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i >> 6] >> (i & 63) & 1 == 1
    }

    /// Sets bit `i`, returning whether it was previously clear.
    #[inline]
    pub fn set(&mut self, i: usize) -> bool {
        debug_assert!(i < self.len);
        let word = &mut self.words[i >> 6];
        let mask = 1u64 << (i & 63);
        let was_clear = *word & mask == 0;
        *word |= mask;
        was_clear
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Indices of set bits in increasing order.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + tz)
            })
        })
    }

    /// True iff every set bit of `self` is set in `other`.
    pub fn is_subset_of(&self, other: &Bitmap) -> bool {
        self.len == other.len
            && self
                .words
                .iter()
                .zip(&other.words)
                .all(|(a, b)| a & !b == 0)
    }
}

impl fmt::Debug for Bitmap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 128 {
            let bits: String = (0..self.len)
                .map(|i| if self.get(i) { '1' } else { '0' })
                .collect();
            write!(f, "Bitmap({bits})")
        } else {
            write!(f, "Bitmap(len={}, ones={})", self.len, self.count_ones())
        }
    }
}

/// A reproducible random stream keyed by `(seed, stream_id)`.
///
/// Distinct stream ids select disjoint ChaCha streams under the same key, so
/// trials can run in any order or in parallel and still draw the same bits.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw from `0..n`.
    #[inline]
    pub fn below(&mut self, n: u32) -> u32 {
        self.rng.random_range(0..n)
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(alias = "naive")]
    Naive,
    #[serde(alias = "cyclic")]
    Cyclic,
    #[serde(
        alias = "improved",
        alias = "improved-cyclic",
        alias = "improved_cyclic"
    )]
    ImprovedCyclic,
    #[serde(alias = "oracle")]
    Oracle,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Naive,
        Algorithm::Cyclic,
        Algorithm::ImprovedCyclic,
        Algorithm::Oracle,
    ];

    /// The three message-passing protocols, excluding the oracle.
    pub const PROTOCOLS: [Algorithm; 3] = [
        Algorithm::Naive,
        Algorithm::Cyclic,
        Algorithm::ImprovedCyclic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Naive => "Naive",
            Algorithm::Cyclic => "Cyclic",
            Algorithm::ImprovedCyclic => "ImprovedCyclic",
            Algorithm::Oracle => "Oracle",
        }
    }

    /// Default phase-1 slack `δ₁` for the two-phase protocols.
    pub fn default_phase1_slack(self) -> f64 {
        match self {
            Algorithm::Cyclic => DEFAULT_CYCLIC_SLACK,
            Algorithm::ImprovedCyclic => DEFAULT_IMPROVED_SLACK,
            Algorithm::Naive | Algorithm::Oracle => DEFAULT_CYCLIC_SLACK,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "naive" => Ok(Algorithm::Naive),
            "cyclic" => Ok(Algorithm::Cyclic),
            "improved" | "improvedcyclic" => Ok(Algorithm::ImprovedCyclic),
            "oracle" => Ok(Algorithm::Oracle),
            _ => Err(Error::config(format!("unknown algorithm {s:?}"))),
        }
    }
}

pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_CYCLIC_SLACK: f64 = 0.2;
pub const DEFAULT_IMPROVED_SLACK: f64 = 0.1;

/// Parameters of one protocol run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub algorithm: Algorithm,
    #[serde(rename = "N")]
    pub nodes: usize,
    pub p: f64,
    /// Multiplier `δ₁` on `ln N / ln(1+p)` for the length of phase 1.
    pub phase1_slack: f64,
    pub epsilon: f64,
    pub segment_length_override: Option<usize>,
    /// Informed count a segment needs after its census to be good.
    pub good_threshold_override: Option<usize>,
    pub max_steps: u64,
}

impl ProtocolConfig {
    pub fn new(algorithm: Algorithm, nodes: usize, p: f64) -> Result<Self> {
        check_population(nodes, p)?;
        let config = ProtocolConfig {
            algorithm,
            nodes,
            p,
            phase1_slack: algorithm.default_phase1_slack(),
            epsilon: DEFAULT_EPSILON,
            segment_length_override: None,
            good_threshold_override: None,
            max_steps: default_max_steps(nodes, p),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_algorithm(mut self, algorithm: Algorithm) -> Self {
        self.algorithm = algorithm;
        self
    }

    pub fn with_phase1_slack(mut self, slack: f64) -> Self {
        self.phase1_slack = slack;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_segment_length(mut self, len: usize) -> Self {
        self.segment_length_override = Some(len);
        self
    }

    pub fn with_good_threshold(mut self, threshold: usize) -> Self {
        self.good_threshold_override = Some(threshold);
        self
    }

    pub fn with_max_steps(mut self, max_steps: u64) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_population(self.nodes, self.p)?;
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::config(format!(
                "epsilon must lie in (0, 1/2), got {}",
                self.epsilon
            )));
        }
        if !(self.phase1_slack >= 0.0 && self.phase1_slack.is_finite()) {
            return Err(Error::config(format!(
                "phase1_slack must be a finite nonnegative number, got {}",
                self.phase1_slack
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::config("max_steps must be at least 1"));
        }
        if let Some(len) = self.segment_length_override {
            if len == 0 || len > self.nodes {
                return Err(Error::config(format!(
                    "segment length {len} must lie in 1..={}",
                    self.nodes
                )));
            }
        }
        if self.good_threshold_override == Some(0) {
            return Err(Error::config("good-segment threshold must be at least 1"));
        }
        Ok(())
    }

    /// `ℓ = round(sqrt(ln N))`, at least 1, unless overridden.
    pub fn segment_length(&self) -> usize {
        self.segment_length_override.unwrap_or_else(|| {
            let len = (self.nodes as f64).ln().sqrt().round() as usize;
            len.clamp(1, self.nodes.max(1))
        })
    }

    /// Number of naive rounds before the cyclic phases start.
    pub fn phase1_length(&self) -> u64 {
        if self.nodes <= 1 {
            return 0;
        }
        let nominal = (self.nodes as f64).ln() / self.p.ln_1p();
        ((1.0 + self.phase1_slack) * nominal).ceil() as u64
    }

    /// `ceil(ℓ·p/2)`, at least 1, unless overridden.
    pub fn good_threshold(&self) -> usize {
        self.good_threshold_override.unwrap_or_else(|| {
            let t = (self.segment_length() as f64 * self.p / 2.0).ceil() as usize;
            t.max(1)
        })
    }

    /// The two stage thresholds `εpN` and `(1−ε)pN`.
    pub fn stage_thresholds(&self) -> (f64, f64) {
        let pn = self.p * self.nodes as f64;
        (self.epsilon * pn, (1.0 - self.epsilon) * pn)
    }
}

fn check_population(nodes: usize, p: f64) -> Result<()> {
    if nodes == 0 {
        return Err(Error::config("network must have at least one node"));
    }
    if nodes > u32::MAX as usize {
        return Err(Error::config(format!("N = {nodes} exceeds u32 node ids")));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::config(format!("p must lie in (0, 1], got {p}")));
    }
    Ok(())
}

/// `64·ln N / ln(1+p)` rounded up, never below 64.
pub fn default_max_steps(nodes: usize, p: f64) -> u64 {
    let scaled = 64.0 * (nodes.max(1) as f64).ln() / p.ln_1p();
    (scaled.ceil() as u64).max(64)
}

/// Activity and knowledge of every node, plus the round clock.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkState {
    node_count: usize,
    active: Bitmap,
    informed: Bitmap,
    clock: u64,
    active_count: usize,
    informed_count: usize,
}

impl NetworkState {
    /// Builds a state from explicit flags. Node 0 must be active and
    /// informed, and every informed node must be active.
    pub fn from_flags(active: &[bool], informed: &[bool]) -> Result<Self> {
        let n = active.len();
        if n == 0 || informed.len() != n {
            return Err(Error::config(
                "flag vectors must be nonempty and equally long",
            ));
        }
        if n > u32::MAX as usize {
            return Err(Error::config("too many nodes"));
        }
        if !active[0] || !informed[0] {
            return Err(Error::config("node 0 must be active and informed"));
        }
        let mut a = Bitmap::new(n);
        let mut k = Bitmap::new(n);
        for i in 0..n {
            if informed[i] && !active[i] {
                return Err(Error::config(format!("node {i} is informed but inactive")));
            }
            if active[i] {
                a.set(i);
            }
            if informed[i] {
                k.set(i);
            }
        }
        Ok(Self::from_bitmaps(a, k))
    }

    pub fn fully_active(n: usize) -> Result<Self> {
        check_population(n, 1.0)?;
        let mut informed = Bitmap::new(n);
        informed.set(0);
        Ok(Self::from_bitmaps(Bitmap::full(n), informed))
    }

    /// A fresh clock-0 state on the given active set, with only node 0
    /// informed.
    pub(crate) fn from_active(mut active: Bitmap) -> Self {
        active.set(0);
        let mut informed = Bitmap::new(active.len());
        informed.set(0);
        Self::from_bitmaps(active, informed)
    }

    fn from_bitmaps(active: Bitmap, informed: Bitmap) -> Self {
        NetworkState {
            node_count: active.len(),
            active_count: active.count_ones(),
            informed_count: informed.count_ones(),
            active,
            informed,
            clock: 0,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn active(&self) -> &Bitmap {
        &self.active
    }

    pub fn informed(&self) -> &Bitmap {
        &self.informed
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    /// `n`, the number of active nodes.
    pub fn active_count(&self) -> usize {
        self.active_count
    }

    pub fn informed_count(&self) -> usize {
        self.informed_count
    }

    #[inline]
    pub fn is_active(&self, i: usize) -> bool {
        self.active.get(i)
    }

    #[inline]
    pub fn is_informed(&self, i: usize) -> bool {
        self.informed.get(i)
    }

    pub fn is_complete(&self) -> bool {
        self.informed_count == self.active_count
    }

    /// Marks an active node informed; returns whether it was new.
    #[inline]
    pub(crate) fn inform(&mut self, i: usize) -> bool {
        debug_assert!(self.active.get(i), "node {i} is inactive");
        let new = self.informed.set(i);
        self.informed_count += new as usize;
        new
    }

    pub(crate) fn tick(&mut self) {
        self.clock += 1;
    }
}

/// Samples the active set: node 0 is forced active and informed, every
/// other node is active independently with probability `p`.
pub fn sample_active(nodes: usize, p: f64, rng: &mut RngStream) -> Result<NetworkState> {
    check_population(nodes, p)?;
    let mut active = Bitmap::new(nodes);
    active.set(0);
    if p >= 1.0 {
        active = Bitmap::full(nodes);
    } else {
        for i in 1..nodes {
            if rng.bernoulli(p) {
                active.set(i);
            }
        }
    }
    let mut informed = Bitmap::new(nodes);
    informed.set(0);
    Ok(NetworkState::from_bitmaps(active, informed))
}

pub fn informed_count(state: &NetworkState) -> usize {
    state.informed_count()
}

pub fn is_complete(state: &NetworkState) -> bool {
    state.is_complete()
}
