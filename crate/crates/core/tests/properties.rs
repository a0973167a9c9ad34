use proptest::prelude::*;

use rumorsim::protocols::{run_oracle_along, Simulation};
use rumorsim::{
    longest_uninformed_run, sample_active, step_naive, Algorithm, Bitmap, NetworkState,
    ProtocolConfig, RngStream,
};

fn algorithm() -> impl Strategy<Value = Algorithm> {
    prop::sample::select(Algorithm::ALL.to_vec())
}

fn flags(state: &NetworkState) -> Vec<bool> {
    (0..state.node_count())
        .map(|i| state.is_informed(i))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn traces_are_consistent(
        alg in algorithm(),
        nodes in 1usize..400,
        p in 0.05f64..=1.0,
        seed in any::<u64>(),
        stream in 0u64..1000,
    ) {
        let config = ProtocolConfig::new(alg, nodes, p).unwrap();
        let run = || Simulation::new(&config)
            .record_trajectory(true)
            .run(&mut RngStream::new(seed, stream))
            .unwrap();
        let out = run();
        let trace = &out.trace;
        prop_assert_eq!(trace, &run().trace);

        prop_assert!(out.state.informed().is_subset_of(out.state.active()));
        prop_assert_eq!(trace.n_active, out.state.active_count());
        prop_assert_eq!(trace.cap_hit, !out.state.is_complete());
        prop_assert_eq!(trace.completion_time, out.state.clock());

        let traj = trace.trajectory.as_ref().unwrap();
        prop_assert_eq!(traj.len() as u64, trace.completion_time + 1);
        prop_assert_eq!(traj[0], 1);
        prop_assert!(traj.windows(2).all(|w| w[0] <= w[1]));
        if !trace.cap_hit {
            let first = traj.iter().position(|&k| k as usize == trace.n_active).unwrap();
            prop_assert_eq!(first as u64, trace.completion_time);
        }

        let st = trace.stage_times;
        if let (Some(a), Some(b)) = (st.t_eps, st.t_one_minus_eps) {
            prop_assert!(a <= b);
            prop_assert!(b <= trace.completion_time);
        }
        if let Some(d) = trace.stage_durations() {
            prop_assert_eq!(d.iter().sum::<u64>(), trace.completion_time);
        }
        match alg {
            Algorithm::Cyclic | Algorithm::ImprovedCyclic => {
                if let Some(end) = trace.phase1_end {
                    prop_assert_eq!(end, config.phase1_length());
                }
            }
            _ => prop_assert_eq!(trace.phase1_end, None),
        }
        if alg != Algorithm::ImprovedCyclic {
            prop_assert!(!trace.cap_hit);
        }
    }

    #[test]
    fn naive_steps_only_add_active_nodes(
        nodes in 1usize..300,
        p in 0.05f64..=1.0,
        seed in any::<u64>(),
        steps in 1usize..20,
    ) {
        let mut rng = RngStream::new(seed, 0);
        let mut state = sample_active(nodes, p, &mut rng).unwrap();
        for t in 0..steps {
            let before = state.informed().clone();
            step_naive(&mut state, &mut rng);
            prop_assert!(before.is_subset_of(state.informed()));
            prop_assert!(state.informed().is_subset_of(state.active()));
            prop_assert_eq!(state.clock(), t as u64 + 1);
            prop_assert_eq!(state.informed_count(), state.informed().count_ones());
        }
    }

    #[test]
    fn complete_states_stay_put(nodes in 1usize..200, seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 1);
        let active: Vec<bool> = (0..nodes).map(|i| i == 0 || rng.bernoulli(0.5)).collect();
        let mut state = NetworkState::from_flags(&active, &active).unwrap();
        step_naive(&mut state, &mut rng);
        prop_assert_eq!(flags(&state), active);
        prop_assert!(state.is_complete());
    }

    #[test]
    fn oracle_dominates_every_protocol(
        nodes in 2usize..600,
        p in 0.1f64..=1.0,
        seed in any::<u64>(),
    ) {
        for alg in Algorithm::PROTOCOLS {
            let config = ProtocolConfig::new(alg, nodes, p).unwrap();
            let out = Simulation::new(&config)
                .record_contacts(true)
                .run(&mut RngStream::new(seed, 0))
                .unwrap();
            if out.trace.cap_hit {
                continue;
            }
            let order = out.contacts.unwrap().into_full_order();
            let oracle = run_oracle_along(&config, &out.state, &order).unwrap();
            prop_assert!(oracle.completion_time <= out.trace.completion_time);
        }
    }

    #[test]
    fn bitmap_agrees_with_bools(bits in prop::collection::vec(any::<bool>(), 0..300)) {
        let mut map = Bitmap::new(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                prop_assert!(map.set(i));
                prop_assert!(!map.set(i));
            }
        }
        prop_assert_eq!(map.count_ones(), bits.iter().filter(|&&b| b).count());
        let ones: Vec<usize> = map.iter_ones().collect();
        let expect: Vec<usize> = (0..bits.len()).filter(|&i| bits[i]).collect();
        prop_assert_eq!(ones, expect);
        prop_assert!(map.is_subset_of(&Bitmap::full(bits.len())));
    }

    #[test]
    fn longest_run_matches_brute_force(
        mut informed in prop::collection::vec(any::<bool>(), 1..120),
    ) {
        informed[0] = true;
        let n = informed.len();
        let state = NetworkState::from_flags(&vec![true; n], &informed).unwrap();
        let mut best = 0;
        for start in 0..n {
            let run = (0..n).take_while(|&d| !informed[(start + d) % n]).count();
            best = best.max(run);
        }
        prop_assert_eq!(longest_uninformed_run(&state), best);
    }
}
