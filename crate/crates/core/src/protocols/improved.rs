//! Improved cyclic protocol.
//!
//! After the naive phase the ring is cut into segments of `ℓ` consecutive
//! nodes. Inside each segment the informed nodes first message the rest of
//! the segment round-robin; when a segment's own schedule ends it knows its
//! informed count. A segment at or above the good threshold then starts a
//! wave: its active nodes message the next segment with distinct senders on
//! distinct targets, one segment after another around the ring.
//!
//! A segment belongs to the first wave that reaches it, and its active nodes
//! join that wave once the sweep over it is done. Later waves pass through
//! without picking anyone up. Bad segments never transmit on their own.

use serde::{Deserialize, Serialize};

use crate::network::{NetworkState, ProtocolConfig};

use super::engine::Round;
use super::trace::ImprovedStats;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SegmentStatus {
    Good,
    Bad,
}

/// Segment census of a state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentView {
    pub segment_length: usize,
    pub threshold: usize,
    pub status: Vec<SegmentStatus>,
    pub informed_count: Vec<usize>,
    /// For each good segment, how many segments ahead its wave has reached.
    pub wave_front: Vec<Option<usize>>,
}

impl SegmentView {
    pub fn census(state: &NetworkState, segment_length: usize, threshold: usize) -> Self {
        let n = state.node_count();
        let count = n.div_ceil(segment_length);
        let informed_count: Vec<usize> = (0..count)
            .map(|s| {
                let (a, b) = segment_range(s, segment_length, n);
                (a..b).filter(|&i| state.is_informed(i)).count()
            })
            .collect();
        let status: Vec<SegmentStatus> = informed_count
            .iter()
            .map(|&c| {
                if c >= threshold {
                    SegmentStatus::Good
                } else {
                    SegmentStatus::Bad
                }
            })
            .collect();
        let wave_front = status
            .iter()
            .map(|s| (*s == SegmentStatus::Good).then_some(0))
            .collect();
        SegmentView {
            segment_length,
            threshold,
            status,
            informed_count,
            wave_front,
        }
    }

    pub fn segment_count(&self) -> usize {
        self.status.len()
    }

    pub fn good_count(&self) -> usize {
        self.status
            .iter()
            .filter(|&&s| s == SegmentStatus::Good)
            .count()
    }
}

fn segment_range(segment: usize, len: usize, n: usize) -> (usize, usize) {
    let a = segment * len;
    (a, (a + len).min(n))
}

struct Wave {
    /// Senders usable in the current round, in join order.
    senders: Vec<u32>,
    /// Joiners still finishing their own segment's intra-segment schedule.
    deferred: Vec<(u64, u32)>,
    target: usize,
    covered: usize,
    /// Senders when the current segment's sweep began.
    width: usize,
    rounds_here: u64,
    swept: usize,
}

/// Per-segment schedule of the intra-segment broadcast.
struct Intra {
    /// Informed nodes at the start of phase 2.
    g0: usize,
    /// Uninformed positions at the start of phase 2.
    rest: Vec<u32>,
    /// Round of phase 2 at which the schedule is done and the census taken.
    done: u64,
}

pub(super) fn run(
    round: &mut Round<'_>,
    config: &ProtocolConfig,
    phase1: u64,
) -> (Option<u64>, Option<ImprovedStats>) {
    while round.running() && round.state.clock() < phase1 {
        round.naive_round();
    }
    let phase1_end = (round.state.clock() >= phase1).then_some(phase1);
    if !round.running() {
        return (phase1_end, None);
    }

    let ell = config.segment_length();
    let n = round.nodes();
    let segments = n.div_ceil(ell);
    let threshold = config.good_threshold();
    let mut stats = ImprovedStats {
        segment_length: ell,
        segment_count: segments,
        good_threshold: threshold,
        sweeps_within_bound: true,
        ..Default::default()
    };

    let intra: Vec<Intra> = (0..segments)
        .map(|s| {
            let (a, b) = segment_range(s, ell, n);
            let rest: Vec<u32> = (a..b)
                .filter(|&i| !round.state.is_informed(i))
                .map(|i| i as u32)
                .collect();
            let g0 = (b - a) - rest.len();
            let done = if g0 > 0 {
                rest.len().div_ceil(g0) as u64
            } else {
                0
            };
            Intra { g0, rest, done }
        })
        .collect();
    let last_census = intra.iter().map(|s| s.done).max().unwrap_or(0);
    let mut by_done: Vec<Vec<usize>> = vec![Vec::new(); last_census as usize + 1];
    for (s, info) in intra.iter().enumerate() {
        by_done[info.done as usize].push(s);
    }

    let mut claimed: Vec<Option<usize>> = vec![None; segments];
    let mut waves: Vec<Wave> = Vec::new();
    let mut r: u64 = 0;
    loop {
        // census of segments whose own schedule just finished
        if let Some(due) = by_done.get(r as usize) {
            for &s in due {
                let (a, b) = segment_range(s, ell, n);
                let informed = (a..b).filter(|&i| round.state.is_informed(i)).count();
                if informed >= threshold {
                    stats.good_segments += 1;
                }
                if claimed[s].is_some() || informed < threshold {
                    continue;
                }
                claimed[s] = Some(waves.len());
                let senders: Vec<u32> = (a..b)
                    .filter(|&i| round.state.is_active(i))
                    .map(|i| i as u32)
                    .collect();
                let mut wave = Wave {
                    width: senders.len(),
                    senders,
                    deferred: Vec::new(),
                    target: s,
                    covered: 0,
                    rounds_here: 0,
                    swept: 0,
                };
                move_on(&mut wave, &mut claimed, waves.len(), segments);
                waves.push(wave);
            }
        }
        if !round.running() {
            break;
        }
        let live = waves.iter().any(|w| w.swept < segments);
        if r >= last_census && !live {
            break;
        }

        for info in intra.iter().filter(|info| r < info.done) {
            let offset = r as usize * info.g0;
            for &target in info.rest.iter().skip(offset).take(info.g0) {
                round.send(target);
            }
        }
        for wave in waves.iter_mut().filter(|w| w.swept < segments) {
            let (a, b) = segment_range(wave.target, ell, n);
            // sender j takes target start + j
            let start = a + wave.covered;
            for target in start..(start + wave.senders.len()).min(b) {
                round.send(target as u32);
            }
            wave.covered += wave.senders.len();
            wave.rounds_here += 1;
        }
        round.commit();
        r += 1;

        for (id, wave) in waves.iter_mut().enumerate() {
            if wave.swept >= segments {
                continue;
            }
            let (a, b) = segment_range(wave.target, ell, n);
            if wave.covered >= b - a {
                let bound = ell.div_ceil(wave.width.max(1)) as u64;
                stats.sweeps_within_bound &= wave.rounds_here <= bound;
                stats.longest_segment_sweep = stats.longest_segment_sweep.max(wave.rounds_here);
                if claimed[wave.target] == Some(id) {
                    let ready = intra[wave.target].done;
                    for i in (a..b).filter(|&i| round.state.is_active(i)) {
                        wave.deferred.push((ready, i as u32));
                    }
                }
                move_on(wave, &mut claimed, id, segments);
            }
            wave.deferred.retain(|&(ready, node)| {
                let now = ready <= r;
                if now {
                    wave.senders.push(node);
                }
                !now
            });
            if wave.covered == 0 {
                wave.width = wave.senders.len();
            }
        }
    }
    stats.phase2a_steps = r.min(last_census);
    stats.phase2_steps = r;

    // nothing left to carry the message: idle until the cap
    while round.running() {
        round.commit();
    }
    (phase1_end, Some(stats))
}

/// Points `wave` at the segment after its current one, claiming it when no
/// other wave got there first.
fn move_on(wave: &mut Wave, claimed: &mut [Option<usize>], id: usize, segments: usize) {
    wave.target = (wave.target + 1) % segments;
    wave.swept += 1;
    wave.covered = 0;
    wave.rounds_here = 0;
    if claimed[wave.target].is_none() {
        claimed[wave.target] = Some(id);
    }
}
