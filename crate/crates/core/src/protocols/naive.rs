use super::engine::Round;

pub(super) fn run(round: &mut Round<'_>) {
    while round.running() {
        round.naive_round();
    }
}
