//! The coordinated lower-bound protocol: in every round the `k` informed
//! nodes message `k` distinct nodes that were never targeted before. Whether
//! a target is active is only revealed on delivery, so `k` grows like a
//! branching process with two children w.p. `p` and one otherwise, until
//! the untargeted pool runs out.

use super::engine::Round;

/// Fresh targets in index order `1, 2, …, N−1`.
pub(super) fn run_sequential(round: &mut Round<'_>) {
    run_along(round, |i| (i + 1) as u32);
}

/// Fresh targets in the order `order_at(0), order_at(1), …`, which must
/// enumerate `1..N` exactly once.
pub(super) fn run_along(round: &mut Round<'_>, order_at: impl Fn(usize) -> u32) {
    let pool = round.nodes() - 1;
    let mut next = 0;
    while round.running() {
        let k = round.state.informed_count();
        let batch = k.min(pool - next);
        for i in next..next + batch {
            round.send(order_at(i));
        }
        next += batch;
        round.commit();
    }
}
