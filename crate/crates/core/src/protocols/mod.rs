//! Step functions and run drivers for the broadcast protocols.
//!
//! Every protocol is a sequence of synchronous rounds. In a round each
//! informed node sends at most one message; messages are delivered at the
//! end of the round, so a node informed in round `t` first sends in round
//! `t + 1`. All four algorithms share phase-1 randomness: runs of different
//! algorithms started from equal `(seed, stream_id)` see the same active
//! set and, for the two-phase protocols, the same phase-1 trajectory as the
//! naive protocol.

mod cyclic;
mod engine;
mod improved;
mod naive;
mod oracle;
mod trace;

pub use engine::ContactLog;
pub use improved::{SegmentStatus, SegmentView};
pub use trace::{ImprovedStats, StageTimes, TraceResult};

use crate::error::{Error, Result};
use crate::network::{sample_active, Algorithm, NetworkState, ProtocolConfig, RngStream};

use engine::Round;

/// Runs one protocol with optional instrumentation.
#[derive(Clone, Debug)]
pub struct Simulation<'c> {
    config: &'c ProtocolConfig,
    trajectory: bool,
    contacts: bool,
    phase1_rounds: Option<u64>,
}

/// A finished run: the trace, the final state and, when requested, the
/// first-contact log.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub trace: TraceResult,
    pub state: NetworkState,
    pub contacts: Option<ContactLog>,
}

impl<'c> Simulation<'c> {
    pub fn new(config: &'c ProtocolConfig) -> Self {
        Simulation {
            config,
            trajectory: false,
            contacts: false,
            phase1_rounds: None,
        }
    }

    pub fn record_trajectory(mut self, on: bool) -> Self {
        self.trajectory = on;
        self
    }

    pub fn record_contacts(mut self, on: bool) -> Self {
        self.contacts = on;
        self
    }

    /// Overrides the phase-1 length of the cyclic protocols, e.g. `0` to
    /// start phase 2 directly from a prepared state.
    pub fn phase1_rounds(mut self, rounds: u64) -> Self {
        self.phase1_rounds = Some(rounds);
        self
    }

    /// Samples the active set from `rng` and runs on it with the same stream.
    pub fn run(&self, rng: &mut RngStream) -> Result<RunOutput> {
        self.config.validate()?;
        let state = sample_active(self.config.nodes, self.config.p, rng)?;
        self.run_on(state, rng)
    }

    pub fn run_on(&self, mut state: NetworkState, rng: &mut RngStream) -> Result<RunOutput> {
        let config = self.config;
        config.validate()?;
        if state.node_count() != config.nodes {
            return Err(Error::config(format!(
                "state has {} nodes but config expects {}",
                state.node_count(),
                config.nodes
            )));
        }
        let phase1 = self.phase1_rounds.unwrap_or_else(|| config.phase1_length());
        let mut round = Round::new(&mut state, rng, config.max_steps);
        if self.contacts {
            round.record_contacts();
        }
        if self.trajectory {
            round.record_trajectory();
        }
        round.track_stages(config.stage_thresholds());

        let mut phase1_end = None;
        let mut improved_stats = None;
        match config.algorithm {
            Algorithm::Naive => naive::run(&mut round),
            Algorithm::Cyclic => phase1_end = cyclic::run(&mut round, phase1),
            Algorithm::ImprovedCyclic => {
                let (end, stats) = improved::run(&mut round, config, phase1);
                phase1_end = end;
                improved_stats = stats;
            }
            Algorithm::Oracle => oracle::run_sequential(&mut round),
        }
        let recorded = round.finish();
        let trace = TraceResult {
            config: config.clone(),
            n_active: state.active_count(),
            completion_time: state.clock(),
            cap_hit: !state.is_complete(),
            phase1_end,
            stage_times: recorded.stages,
            trajectory: recorded.trajectory,
            improved: improved_stats,
        };
        Ok(RunOutput {
            trace,
            state,
            contacts: recorded.contacts,
        })
    }
}

/// Dispatches on `config.algorithm`.
pub fn run_protocol(config: &ProtocolConfig, rng: &mut RngStream) -> Result<TraceResult> {
    Ok(Simulation::new(config).run(rng)?.trace)
}

fn expect(config: &ProtocolConfig, algorithm: Algorithm) -> Result<()> {
    if config.algorithm != algorithm {
        return Err(Error::config(format!(
            "config is for {} but {} was requested",
            config.algorithm, algorithm
        )));
    }
    Ok(())
}

pub fn run_naive(config: &ProtocolConfig, rng: &mut RngStream) -> Result<TraceResult> {
    expect(config, Algorithm::Naive)?;
    run_protocol(config, rng)
}

pub fn run_cyclic(config: &ProtocolConfig, rng: &mut RngStream) -> Result<TraceResult> {
    expect(config, Algorithm::Cyclic)?;
    run_protocol(config, rng)
}

pub fn run_improved_cyclic(config: &ProtocolConfig, rng: &mut RngStream) -> Result<TraceResult> {
    expect(config, Algorithm::ImprovedCyclic)?;
    run_protocol(config, rng)
}

/// The coordinated oracle on a sampled active set, targeting fresh nodes
/// in index order.
pub fn run_oracle(config: &ProtocolConfig, rng: &mut RngStream) -> Result<TraceResult> {
    expect(config, Algorithm::Oracle)?;
    run_protocol(config, rng)
}

/// The oracle run along a given order of fresh targets, typically the
/// first-contact order of a protocol run on the same active set. Along that
/// order the oracle's targeted set always contains every node the protocol
/// has contacted, so its completion time never exceeds the protocol's.
///
/// `state` supplies the active set; only node 0 is taken as informed.
pub fn run_oracle_along(
    config: &ProtocolConfig,
    state: &NetworkState,
    order: &[u32],
) -> Result<TraceResult> {
    config.validate()?;
    let n = state.node_count();
    if n != config.nodes || order.len() + 1 != n {
        return Err(Error::config(format!(
            "order of length {} is not a permutation of 1..{n}",
            order.len()
        )));
    }
    let mut fresh = NetworkState::from_active(state.active().clone());
    // the stream is never drawn from
    let mut rng = RngStream::new(0, 0);
    let mut round = Round::new(&mut fresh, &mut rng, config.max_steps);
    round.track_stages(config.stage_thresholds());
    oracle::run_along(&mut round, |i| order[i]);
    let recorded = round.finish();
    Ok(TraceResult {
        config: config.clone().with_algorithm(Algorithm::Oracle),
        n_active: fresh.active_count(),
        completion_time: fresh.clock(),
        cap_hit: !fresh.is_complete(),
        phase1_end: None,
        stage_times: recorded.stages,
        trajectory: None,
        improved: None,
    })
}

/// One naive round: every informed node pushes to a uniformly random
/// node among all `N` (itself included).
pub fn step_naive(state: &mut NetworkState, rng: &mut RngStream) {
    let mut round = Round::new(state, rng, u64::MAX);
    round.naive_round();
}

/// The oracle one round at a time: the `k` informed nodes target the next
/// `k` never-targeted nodes in index order.
#[derive(Clone, Debug, Default)]
pub struct OracleStepper {
    next: usize,
}

impl OracleStepper {
    pub fn new() -> Self {
        Self::default()
    }

    /// Nodes targeted so far.
    pub fn targeted(&self) -> usize {
        self.next
    }

    pub fn step(&mut self, state: &mut NetworkState) {
        let pool = state.node_count() - 1;
        let mut rng = RngStream::new(0, 0);
        let mut round = Round::new(state, &mut rng, u64::MAX);
        let batch = round.state.informed_count().min(pool - self.next);
        for i in self.next..self.next + batch {
            round.send(i as u32 + 1);
        }
        self.next += batch;
        round.commit();
    }
}

/// Longest cyclically contiguous block of uninformed nodes, inactive nodes
/// included.
pub fn longest_uninformed_run(state: &NetworkState) -> usize {
    let n = state.node_count();
    let informed = state.informed();
    let Some(first) = informed.iter_ones().next() else {
        return n;
    };
    let mut longest = 0;
    let mut prev = first;
    for i in informed.iter_ones().skip(1) {
        longest = longest.max(i - prev - 1);
        prev = i;
    }
    // wraparound gap from the last informed node back to the first
    longest.max(n - 1 - prev + first)
}
