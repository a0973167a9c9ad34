use super::engine::Round;

/// Naive rounds until `phase1`, then every informed node `i` sweeps
/// `i+1, i+2, …` mod `N`. Nodes informed during the sweep start their own
/// sweep from their index in the following round. Returns the phase-1
/// boundary if the run reached it.
pub(super) fn run(round: &mut Round<'_>, phase1: u64) -> Option<u64> {
    while round.running() && round.state.clock() < phase1 {
        round.naive_round();
    }
    let phase1_end = (round.state.clock() >= phase1).then_some(phase1);
    if !round.running() {
        return phase1_end;
    }

    let n = round.nodes() as u64;
    // (node, next offset); a sweep retires after visiting all N−1 others
    let mut senders: Vec<(u32, u64)> = round
        .state
        .informed()
        .iter_ones()
        .map(|i| (i as u32, 1))
        .collect();
    while round.running() {
        for (node, offset) in senders.iter_mut() {
            round.send(((*node as u64 + *offset) % n) as u32);
            *offset += 1;
        }
        senders.retain(|&(_, offset)| offset < n);
        let newly = round.commit_collect();
        senders.extend(newly.iter().map(|&i| (i, 1)));
    }
    phase1_end
}
