use crate::network::{Bitmap, NetworkState, RngStream};

use super::trace::StageTimes;

/// First-contact order of nodes other than node 0.
#[derive(Clone, Debug)]
pub struct ContactLog {
    contacted: Bitmap,
    order: Vec<u32>,
}

impl ContactLog {
    pub(crate) fn new(nodes: usize) -> Self {
        ContactLog {
            contacted: Bitmap::new(nodes),
            order: Vec::new(),
        }
    }

    #[inline]
    fn touch(&mut self, target: u32) {
        if target != 0 && self.contacted.set(target as usize) {
            self.order.push(target);
        }
    }

    /// Nodes in the order they first received a message.
    pub fn contacted(&self) -> &[u32] {
        &self.order
    }

    /// The contact order followed by every never-contacted node (except
    /// node 0) in index order; a permutation of `1..N`.
    pub fn into_full_order(self) -> Vec<u32> {
        let ContactLog {
            contacted,
            mut order,
        } = self;
        order.reserve(contacted.len().saturating_sub(order.len() + 1));
        for i in 1..contacted.len() {
            if !contacted.get(i) {
                order.push(i as u32);
            }
        }
        order
    }
}

/// Tracks the first rounds at which `k_t` reaches each stage threshold.
#[derive(Clone, Copy, Debug)]
pub(crate) struct StageTracker {
    eps: f64,
    one_minus_eps: f64,
    times: StageTimes,
}

impl StageTracker {
    pub(crate) fn new((eps, one_minus_eps): (f64, f64)) -> Self {
        StageTracker {
            eps,
            one_minus_eps,
            times: StageTimes::default(),
        }
    }

    fn observe(&mut self, clock: u64, informed: usize) {
        let k = informed as f64;
        if self.times.t_eps.is_none() && k >= self.eps {
            self.times.t_eps = Some(clock);
        }
        if self.times.t_one_minus_eps.is_none() && k >= self.one_minus_eps {
            self.times.t_one_minus_eps = Some(clock);
        }
    }

    pub(crate) fn times(&self) -> StageTimes {
        self.times
    }
}

/// One synchronous round at a time: senders call [`Round::send`], then
/// [`Round::commit`] delivers every message at once and advances the clock.
pub(crate) struct Round<'a> {
    pub(crate) state: &'a mut NetworkState,
    pub(crate) rng: &'a mut RngStream,
    /// Active and not yet informed.
    receptive: Vec<u64>,
    /// Receptive targets of this round; a prefix of length `pending` is live.
    buf: Vec<u32>,
    pending: usize,
    newly: Vec<u32>,
    contacts: Option<ContactLog>,
    trajectory: Option<Vec<u64>>,
    stages: Option<StageTracker>,
    max_steps: u64,
}

impl<'a> Round<'a> {
    pub(crate) fn new(state: &'a mut NetworkState, rng: &'a mut RngStream, max_steps: u64) -> Self {
        let receptive = state
            .active()
            .words()
            .iter()
            .zip(state.informed().words())
            .map(|(a, k)| a & !k)
            .collect();
        let buf = vec![0; state.node_count() + 1];
        Round {
            state,
            rng,
            receptive,
            buf,
            pending: 0,
            newly: Vec::new(),
            contacts: None,
            trajectory: None,
            stages: None,
            max_steps,
        }
    }

    pub(crate) fn record_contacts(&mut self) {
        self.contacts = Some(ContactLog::new(self.state.node_count()));
    }

    pub(crate) fn record_trajectory(&mut self) {
        self.trajectory = Some(vec![self.state.informed_count() as u64]);
    }

    pub(crate) fn track_stages(&mut self, thresholds: (f64, f64)) {
        let mut tracker = StageTracker::new(thresholds);
        tracker.observe(self.state.clock(), self.state.informed_count());
        self.stages = Some(tracker);
    }

    pub(crate) fn nodes(&self) -> usize {
        self.state.node_count()
    }

    pub(crate) fn is_complete(&self) -> bool {
        self.state.is_complete()
    }

    /// True once the step cap is reached.
    pub(crate) fn exhausted(&self) -> bool {
        self.state.clock() >= self.max_steps
    }

    pub(crate) fn running(&self) -> bool {
        !self.is_complete() && !self.exhausted()
    }

    #[inline]
    pub(crate) fn send(&mut self, target: u32) {
        if let Some(log) = &mut self.contacts {
            log.touch(target);
        }
        // branch-free: always write, keep only receptive targets
        let bit = self.receptive[(target >> 6) as usize] >> (target & 63) & 1;
        self.buf[self.pending] = target;
        self.pending += bit as usize;
    }

    #[inline]
    fn deliver(&mut self, target: u32) -> bool {
        self.receptive[(target >> 6) as usize] &= !(1u64 << (target & 63));
        self.state.inform(target as usize)
    }

    /// Delivers this round's messages and advances the clock.
    pub(crate) fn commit(&mut self) {
        for i in 0..self.pending {
            self.deliver(self.buf[i]);
        }
        self.pending = 0;
        self.close_round();
    }

    /// Like [`Round::commit`], returning the newly informed nodes in
    /// increasing index order.
    pub(crate) fn commit_collect(&mut self) -> &[u32] {
        self.newly.clear();
        for i in 0..self.pending {
            let t = self.buf[i];
            if self.deliver(t) {
                self.newly.push(t);
            }
        }
        self.pending = 0;
        self.newly.sort_unstable();
        self.close_round();
        &self.newly
    }

    fn close_round(&mut self) {
        self.state.tick();
        let (clock, k) = (self.state.clock(), self.state.informed_count());
        if let Some(traj) = &mut self.trajectory {
            traj.push(k as u64);
        }
        if let Some(stages) = &mut self.stages {
            stages.observe(clock, k);
        }
    }

    /// One round of uniform random push from every informed node, drawn in
    /// increasing node order.
    pub(crate) fn naive_round(&mut self) {
        let n = self.nodes() as u32;
        let words = self.state.informed().words().len();
        for w in 0..words {
            let mut bits = self.state.informed().words()[w];
            while bits != 0 {
                bits &= bits - 1;
                let target = self.rng.below(n);
                self.send(target);
            }
        }
        self.commit();
    }

    pub(crate) fn finish(self) -> Recorded {
        Recorded {
            contacts: self.contacts,
            trajectory: self.trajectory,
            stages: self.stages.map(|s| s.times()).unwrap_or_default(),
        }
    }
}

pub(crate) struct Recorded {
    pub(crate) contacts: Option<ContactLog>,
    pub(crate) trajectory: Option<Vec<u64>>,
    pub(crate) stages: StageTimes,
}
