use rumorsim::harness::checks;
use rumorsim::protocols::{run_oracle_along, SegmentStatus, SegmentView, Simulation};
use rumorsim::{
    informed_count, is_complete, longest_uninformed_run, run_protocol, sample_active, Algorithm,
    NetworkState, ProtocolConfig, RngStream,
};

fn state(active: &[bool], informed: &[bool]) -> NetworkState {
    NetworkState::from_flags(active, informed).unwrap()
}

#[test]
fn sampling_corner_cases() {
    for seed in 0..5 {
        let s = sample_active(5, 1.0, &mut RngStream::new(seed, 0)).unwrap();
        assert_eq!(s.active_count(), 5);
        assert_eq!(informed_count(&s), 1);
        assert!(s.is_informed(0));
        assert_eq!(s.clock(), 0);

        let s = sample_active(1, 0.3, &mut RngStream::new(seed, 0)).unwrap();
        assert_eq!(s.active_count(), 1);
        assert!(is_complete(&s));
    }
    assert!(sample_active(0, 0.5, &mut RngStream::new(0, 0)).is_err());
    assert!(sample_active(4, 0.0, &mut RngStream::new(0, 0)).is_err());
    assert!(sample_active(4, 1.01, &mut RngStream::new(0, 0)).is_err());
}

#[test]
fn completeness_queries() {
    let all = [true; 4];
    assert!(!is_complete(&state(&all, &[true, false, false, false])));
    assert!(!is_complete(&state(&all, &[true, true, true, false])));
    assert!(is_complete(&state(
        &[true, false, true, false],
        &[true, false, true, false]
    )));
    assert!(NetworkState::from_flags(&[true, false], &[true, true]).is_err());
    assert!(NetworkState::from_flags(&[false, true], &[false, true]).is_err());
}

#[test]
fn marginal_activation_probability() {
    let (nodes, seeds, p) = (10, 10_000u64, 0.3);
    let mut counts = vec![0u64; nodes];
    for s in 0..seeds {
        let st = sample_active(nodes, p, &mut RngStream::new(99, s)).unwrap();
        for (i, c) in counts.iter_mut().enumerate() {
            *c += u64::from(st.is_active(i));
        }
    }
    assert_eq!(counts[0], seeds);
    let se = (p * (1.0 - p) / seeds as f64).sqrt();
    for (i, &c) in counts.iter().enumerate().skip(1) {
        let f = c as f64 / seeds as f64;
        assert!((f - p).abs() <= 3.0 * se, "node {i}: {f}");
    }
}

#[test]
fn active_count_concentrates() {
    let outcome = checks::concentration(200_000, 0.5, 1000, 4).unwrap();
    assert!(outcome.passed, "{}", outcome.detail);
}

#[test]
fn same_stream_same_trace() {
    for alg in Algorithm::ALL {
        let config = ProtocolConfig::new(alg, 5000, 0.6).unwrap();
        let a = Simulation::new(&config)
            .record_trajectory(true)
            .run(&mut RngStream::new(8, 3))
            .unwrap();
        let b = Simulation::new(&config)
            .record_trajectory(true)
            .run(&mut RngStream::new(8, 3))
            .unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(
            serde_json::to_string(&a.trace).unwrap(),
            serde_json::to_string(&b.trace).unwrap()
        );
        let c = run_protocol(&config, &mut RngStream::new(8, 4)).unwrap();
        assert_eq!(c.config, a.trace.config);
    }
}

#[test]
fn two_phase_protocols_share_phase1_with_naive() {
    let n = 4096;
    for stream in 0..10 {
        let naive = ProtocolConfig::new(Algorithm::Naive, n, 0.5).unwrap();
        let base = Simulation::new(&naive)
            .record_trajectory(true)
            .run(&mut RngStream::new(1, stream))
            .unwrap()
            .trace;
        for alg in [Algorithm::Cyclic, Algorithm::ImprovedCyclic] {
            let config = ProtocolConfig::new(alg, n, 0.5).unwrap();
            let t = Simulation::new(&config)
                .record_trajectory(true)
                .run(&mut RngStream::new(1, stream))
                .unwrap()
                .trace;
            assert_eq!(t.n_active, base.n_active);
            let end = t.phase1_end.unwrap() as usize;
            let a = t.trajectory.as_ref().unwrap();
            let b = base.trajectory.as_ref().unwrap();
            let common = (end + 1).min(b.len());
            assert_eq!(a[..common], b[..common], "{alg} stream {stream}");
        }
    }
}

#[test]
fn cyclic_closes_a_gap_of_g_in_g_rounds() {
    let n = 40;
    for (start, g) in [(1, 1), (5, 7), (30, 10), (1, 39)] {
        let informed: Vec<bool> = (0..n).map(|i| !(start..start + g).contains(&i)).collect();
        let s = state(&[true; 40], &informed);
        assert_eq!(longest_uninformed_run(&s), g);
        let config = ProtocolConfig::new(Algorithm::Cyclic, n, 1.0).unwrap();
        let out = Simulation::new(&config)
            .phase1_rounds(0)
            .run_on(s, &mut RngStream::new(0, 0))
            .unwrap();
        assert_eq!(out.trace.completion_time, g as u64, "gap {start}+{g}");
    }
}

#[test]
fn cyclic_phase2_makes_progress_every_round() {
    let n = 300;
    for seed in 0..20u64 {
        let mut rng = RngStream::new(seed, 0);
        let informed: Vec<bool> = (0..n).map(|i| i == 0 || rng.bernoulli(0.05)).collect();
        let config = ProtocolConfig::new(Algorithm::Cyclic, n, 1.0).unwrap();
        let out = Simulation::new(&config)
            .phase1_rounds(0)
            .record_trajectory(true)
            .run_on(state(&vec![true; n], &informed), &mut rng)
            .unwrap();
        let traj = out.trace.trajectory.unwrap();
        assert!(
            traj.windows(2).all(|w| w[1] > w[0]),
            "seed {seed}: {traj:?}"
        );
        assert!(out.state.is_complete());
    }
}

#[test]
fn improved_single_segment_is_intra_segment_only() {
    for n in [2, 5, 9] {
        let mut informed = vec![false; n];
        informed[0] = true;
        let config = ProtocolConfig::new(Algorithm::ImprovedCyclic, n, 1.0)
            .unwrap()
            .with_segment_length(n);
        let out = Simulation::new(&config)
            .phase1_rounds(0)
            .run_on(state(&vec![true; n], &informed), &mut RngStream::new(0, 0))
            .unwrap();
        assert!(out.state.is_complete());
        assert!(out.trace.completion_time <= n as u64);
        let stats = out.trace.improved.unwrap();
        assert_eq!(stats.segment_count, 1);
        assert_eq!(stats.phase2a_steps, n as u64 - 1);
    }
}

#[test]
fn improved_full_segment_sweeps_the_next_in_one_round() {
    let informed = [true, true, true, true, false, false, false, false];
    let config = ProtocolConfig::new(Algorithm::ImprovedCyclic, 8, 1.0)
        .unwrap()
        .with_segment_length(4)
        .with_good_threshold(2);
    let out = Simulation::new(&config)
        .phase1_rounds(0)
        .run_on(state(&[true; 8], &informed), &mut RngStream::new(0, 0))
        .unwrap();
    assert_eq!(out.trace.completion_time, 1);
    let stats = out.trace.improved.unwrap();
    assert_eq!(stats.good_segments, 1);
    assert_eq!(stats.longest_segment_sweep, 1);
}

#[test]
fn improved_wave_crosses_empty_segments() {
    // segment 0 good with one active node, segments 1..3 dead, 4 bad
    let n = 20;
    let mut active = vec![false; n];
    active[0] = true;
    active[17] = true;
    active[19] = true;
    let mut informed = vec![false; n];
    informed[0] = true;
    let config = ProtocolConfig::new(Algorithm::ImprovedCyclic, n, 0.5)
        .unwrap()
        .with_segment_length(4)
        .with_good_threshold(1);
    let out = Simulation::new(&config)
        .phase1_rounds(0)
        .run_on(state(&active, &informed), &mut RngStream::new(0, 0))
        .unwrap();
    assert!(out.state.is_complete());
    // three rounds of intra-segment broadcast, then four per segment with a
    // single sender through segments 1 to 4
    assert_eq!(out.trace.completion_time, 19);
    let stats = out.trace.improved.unwrap();
    assert!(stats.sweeps_within_bound);
    assert_eq!(stats.longest_segment_sweep, 4);
}

#[test]
fn improved_stalls_into_a_cap_hit_without_good_segments() {
    let informed = [true, false, false, false, false, false];
    let active = [true, false, false, true, true, true];
    let config = ProtocolConfig::new(Algorithm::ImprovedCyclic, 6, 0.5)
        .unwrap()
        .with_segment_length(3)
        .with_good_threshold(2)
        .with_max_steps(50);
    let out = Simulation::new(&config)
        .phase1_rounds(0)
        .run_on(state(&active, &informed), &mut RngStream::new(0, 0))
        .unwrap();
    assert!(out.trace.cap_hit);
    assert_eq!(out.trace.completion_time, 50);
    assert_eq!(out.trace.improved.unwrap().good_segments, 0);
}

#[test]
fn improved_sweeps_respect_their_bound() {
    for p in [0.3, 0.5, 0.8] {
        let config = ProtocolConfig::new(Algorithm::ImprovedCyclic, 1 << 14, p).unwrap();
        for t in 0..10 {
            let trace = run_protocol(&config, &mut RngStream::new(2, t)).unwrap();
            assert!(!trace.cap_hit);
            let stats = trace.improved.unwrap();
            let ell = config.segment_length() as u64;
            assert!(stats.phase2a_steps < ell);
            assert!(stats.sweeps_within_bound);
            assert!(stats.longest_segment_sweep <= ell);
        }
    }
}

#[test]
fn segment_census() {
    let informed = [true, false, false, true, true, false, false];
    let view = SegmentView::census(&state(&[true; 7], &informed), 3, 1);
    assert_eq!(view.segment_count(), 3);
    assert_eq!(view.informed_count, vec![1, 2, 0]);
    assert_eq!(
        view.status,
        vec![SegmentStatus::Good, SegmentStatus::Good, SegmentStatus::Bad]
    );
    assert_eq!(view.good_count(), 2);
}

#[test]
fn oracle_doubles_without_failures() {
    for m in [1, 4, 10, 14] {
        let config = ProtocolConfig::new(Algorithm::Oracle, 1 << m, 1.0).unwrap();
        let t = run_protocol(&config, &mut RngStream::new(0, m)).unwrap();
        assert_eq!(t.completion_time, m);
    }
}

#[test]
fn oracle_along_any_contact_order_dominates() {
    for p in [0.3, 0.5, 0.8] {
        let outcome = checks::domination(2048, p, 150, 17).unwrap();
        assert!(outcome.passed, "{}", outcome.detail);
    }
}

#[test]
fn contact_order_is_a_permutation() {
    let config = ProtocolConfig::new(Algorithm::Cyclic, 500, 0.5).unwrap();
    let out = Simulation::new(&config)
        .record_contacts(true)
        .run(&mut RngStream::new(6, 6))
        .unwrap();
    let mut order = out.contacts.unwrap().into_full_order();
    assert_eq!(order.len(), 499);
    let along = run_oracle_along(&config, &out.state, &order).unwrap();
    assert!(along.completion_time <= out.trace.completion_time);
    order.sort_unstable();
    assert!(order.iter().copied().eq(1..500));
}

#[test]
fn completion_lower_bound_at_desk_scale() {
    let n = 1 << 14;
    let times: Vec<_> = Algorithm::PROTOCOLS
        .iter()
        .map(|&alg| {
            let config = ProtocolConfig::new(alg, n, 0.5).unwrap();
            let ts: Vec<u64> = (0..200)
                .map(|t| {
                    run_protocol(&config, &mut RngStream::new(12, t))
                        .unwrap()
                        .completion_time
                })
                .collect();
            (alg, ts)
        })
        .collect();
    for k in [2.0, 4.0, 6.0] {
        let outcome = checks::lower_bound_envelope(&times, n, 0.5, k);
        assert!(outcome.passed, "K={k}: {}", outcome.detail);
    }
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(ProtocolConfig::new(Algorithm::Naive, 0, 0.5).is_err());
    assert!(ProtocolConfig::new(Algorithm::Naive, 4, 0.0).is_err());
    let c = ProtocolConfig::new(Algorithm::ImprovedCyclic, 4, 0.5).unwrap();
    assert!(c.clone().with_segment_length(5).validate().is_err());
    assert!(c.clone().with_epsilon(0.5).validate().is_err());
    assert!(c.clone().with_max_steps(0).validate().is_err());
    assert!(c.clone().with_phase1_slack(-0.1).validate().is_err());
    assert!(c.with_good_threshold(0).validate().is_err());
}
