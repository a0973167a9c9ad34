//! Reusable property checks. Each returns a [`CheckOutcome`] instead of
//! panicking, so the CLI and the tests can share them.
//! Checks that exercise a step rule take it as a closure, so a broken rule
//! can be fed in to confirm the check catches it.

use serde::Serialize;

use crate::error::Result;
use crate::network::{sample_active, Algorithm, NetworkState, ProtocolConfig, RngStream};
use crate::protocols::{run_oracle_along, run_protocol, Simulation};
use crate::theory::{self, ExactLaw};

use super::experiment::{execute, Execution};
use super::spec::{ExperimentSpec, OutputFormat};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        CheckOutcome {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

fn within(observed: f64, expected: f64, tol: f64) -> bool {
    (observed - expected).abs() <= tol
}

/// One naive step from a single informed node on a fully active network:
/// `P(k₁ = 2) = 1/2` for `N = 2`, and `2/3` for `N = 3` (the sender may hit
/// itself). Frequencies must be within 4 standard errors.
pub fn naive_step_law(
    mut step: impl FnMut(&mut NetworkState, &mut RngStream),
    samples: u64,
    seed: u64,
) -> Result<CheckOutcome> {
    let mut detail = Vec::new();
    let mut passed = true;
    for (n, expected) in [(2usize, 0.5), (3, 2.0 / 3.0)] {
        let mut rng = RngStream::new(seed, n as u64);
        let mut hits = 0u64;
        for _ in 0..samples {
            let mut state = NetworkState::fully_active(n)?;
            step(&mut state, &mut rng);
            if state.informed_count() == 2 {
                hits += 1;
            }
        }
        let freq = hits as f64 / samples as f64;
        let se = (expected * (1.0 - expected) / samples as f64).sqrt();
        let ok = within(freq, expected, 4.0 * se);
        passed &= ok;
        detail.push(format!("N={n}: P(k=2) {freq:.4} vs {expected:.4}"));
    }
    Ok(CheckOutcome::new(
        "naive single-step law",
        passed,
        detail.join("; "),
    ))
}

/// `E[k_t] = (1+p)^t` for `t ≤ rounds` on a network large enough that the
/// fresh pool never runs out, each mean within 3 standard errors.
/// `make_step` builds a fresh stepper per sample.
pub fn oracle_growth<S>(
    make_step: impl Fn() -> S,
    nodes: usize,
    p: f64,
    rounds: u32,
    samples: u64,
    seed: u64,
) -> Result<CheckOutcome>
where
    S: FnMut(&mut NetworkState, &mut RngStream),
{
    let mut sums = vec![0.0; rounds as usize + 1];
    let mut squares = vec![0.0; rounds as usize + 1];
    for s in 0..samples {
        let mut rng = RngStream::new(seed, s);
        let mut state = sample_active(nodes, p, &mut rng)?;
        let mut step = make_step();
        for t in 1..=rounds as usize {
            step(&mut state, &mut rng);
            let k = state.informed_count() as f64;
            sums[t] += k;
            squares[t] += k * k;
        }
    }
    let m = samples as f64;
    let mut worst = 0.0f64;
    let mut passed = true;
    for t in 1..=rounds as usize {
        let mean = sums[t] / m;
        let var = (squares[t] / m - mean * mean).max(0.0) * m / (m - 1.0);
        let se = (var / m).sqrt();
        let expected = (1.0 + p).powi(t as i32);
        let z = (mean - expected).abs() / se.max(f64::MIN_POSITIVE);
        worst = worst.max(z);
        passed &= z <= 3.0;
    }
    Ok(CheckOutcome::new(
        "oracle growth E[k_t] = (1+p)^t",
        passed,
        format!("N={nodes} p={p} t≤{rounds}: worst |z| = {worst:.2}"),
    ))
}

fn empirical_law(config: &ProtocolConfig, trials: u64, seed: u64) -> Result<ExactLaw> {
    let times = (0..trials)
        .map(|t| Ok(run_protocol(config, &mut RngStream::new(seed, t))?.completion_time))
        .collect::<Result<Vec<u64>>>()?;
    Ok(ExactLaw::empirical(&times))
}

/// Total-variation distance between the simulated and exact laws.
pub fn law_match(
    algorithm: Algorithm,
    nodes: usize,
    p: f64,
    trials: u64,
    tol: f64,
    seed: u64,
) -> Result<CheckOutcome> {
    let exact = match algorithm {
        Algorithm::Naive => theory::exact_naive_law(nodes, p)?,
        Algorithm::Oracle => theory::exact_oracle_law(nodes, p)?,
        other => {
            return Err(crate::Error::config(format!("no exact law for {other}")));
        }
    };
    let config = ProtocolConfig::new(algorithm, nodes, p)?;
    let empirical = empirical_law(&config, trials, seed)?;
    let tv = exact.total_variation(&empirical);
    Ok(CheckOutcome::new(
        format!("{algorithm} exact law"),
        tv <= tol,
        format!("N={nodes} p={p} trials={trials}: TV {tv:.4} (limit {tol})"),
    ))
}

/// The oracle's exact law is stochastically below the naive one.
pub fn exact_law_ordering(max_nodes: usize, ps: &[f64]) -> Result<CheckOutcome> {
    let mut bad = Vec::new();
    for &p in ps {
        for n in 1..=max_nodes {
            let oracle = theory::exact_oracle_law(n, p)?;
            let naive = theory::exact_naive_law(n, p)?;
            if !oracle.stochastically_le(&naive, 1e-12) {
                bad.push(format!("N={n} p={p}"));
            }
        }
    }
    Ok(CheckOutcome::new(
        "oracle law ≤st naive law",
        bad.is_empty(),
        if bad.is_empty() {
            format!("N ≤ {max_nodes}, p ∈ {ps:?}")
        } else {
            format!("violated at {}", bad.join(", "))
        },
    ))
}

/// Oracle completion time along each protocol's contact order never exceeds
/// the protocol's own, trial by trial.
pub fn domination(nodes: usize, p: f64, trials: u64, seed: u64) -> Result<CheckOutcome> {
    use rayon::prelude::*;
    let violations = Algorithm::PROTOCOLS
        .iter()
        .map(|&alg| {
            let config = ProtocolConfig::new(alg, nodes, p)?;
            (0..trials)
                .into_par_iter()
                .map(|t| {
                    let out = Simulation::new(&config)
                        .record_contacts(true)
                        .run(&mut RngStream::new(seed, t))?;
                    let order = out
                        .contacts
                        .expect("contacts were requested")
                        .into_full_order();
                    let oracle = run_oracle_along(&config, &out.state, &order)?;
                    Ok(usize::from(
                        oracle.completion_time > out.trace.completion_time,
                    ))
                })
                .sum::<Result<usize>>()
                .map(|v| (alg, v))
        })
        .collect::<Result<Vec<_>>>()?;
    let total: usize = violations.iter().map(|(_, v)| v).sum();
    let detail = violations
        .iter()
        .map(|(a, v)| format!("{a}: {v}"))
        .collect::<Vec<_>>()
        .join(", ");
    Ok(CheckOutcome::new(
        "oracle domination",
        total == 0,
        format!("N={nodes} p={p} trials={trials}; violations {detail}"),
    ))
}

/// Fraction of sampled active counts with `|n − pN| > N^{2/3}` is below 0.05.
pub fn concentration(nodes: usize, p: f64, samples: u64, seed: u64) -> Result<CheckOutcome> {
    use rayon::prelude::*;
    let band = (nodes as f64).powf(2.0 / 3.0);
    let centre = p * nodes as f64;
    let outside: u64 = (0..samples)
        .into_par_iter()
        .map(|s| {
            let state = sample_active(nodes, p, &mut RngStream::new(seed, s))?;
            Ok(u64::from(
                (state.active_count() as f64 - centre).abs() > band,
            ))
        })
        .sum::<Result<u64>>()?;
    let frac = outside as f64 / samples as f64;
    Ok(CheckOutcome::new(
        "active-count concentration",
        frac < 0.05,
        format!("N={nodes} p={p}: {outside}/{samples} outside ±N^(2/3)"),
    ))
}

/// No protocol completes before `ln N/ln(1+p) − k` rounds, and the early
/// fraction stays within 1.5× the tail bound.
pub fn lower_bound_envelope(
    times: &[(Algorithm, Vec<u64>)],
    nodes: usize,
    p: f64,
    k: f64,
) -> CheckOutcome {
    let cutoff = (nodes as f64).ln() / p.ln_1p() - k;
    let bound = 1.5 * theory::lower_bound_tail(1.0, p, k);
    let mut passed = true;
    let mut detail = Vec::new();
    for (alg, ts) in times {
        let early = ts.iter().filter(|&&t| (t as f64) < cutoff).count();
        let frac = early as f64 / ts.len() as f64;
        passed &= early == 0 && frac <= bound;
        let min = ts.iter().min().copied().unwrap_or(0);
        detail.push(format!("{alg}: {early}/{} early, min T {min}", ts.len()));
    }
    CheckOutcome::new(
        "completion lower bound",
        passed,
        format!(
            "cutoff {cutoff:.2}, tail limit {bound:.4}; {}",
            detail.join(", ")
        ),
    )
}

/// `f(p) < 0` and `c_improved < c_cyclic < c_naive` on `p = 0.01, …, 0.99`.
pub fn constant_ordering() -> Result<CheckOutcome> {
    let mut bad = Vec::new();
    for i in 1..=99 {
        let p = i as f64 / 100.0;
        let c = theory::TheoryConstants::at(p)?;
        let ok = theory::cyclic_beats_naive(p) < 0.0
            && c.c_improved < c.c_cyclic
            && c.c_cyclic < c.c_naive
            && [c.c_naive, c.c_cyclic, c.c_improved]
                .iter()
                .all(|x| x.is_finite());
        if !ok {
            bad.push(p);
        }
    }
    Ok(CheckOutcome::new(
        "constant ordering",
        bad.is_empty(),
        format!("99 grid points, {} violations {bad:?}", bad.len()),
    ))
}

/// Every traced run keeps informed ⊆ active, a nondecreasing trajectory,
/// and stage times that partition `[0, T_n]`.
pub fn run_invariants(nodes: usize, p: f64, trials: u64, seed: u64) -> Result<CheckOutcome> {
    let mut bad = Vec::new();
    for alg in Algorithm::ALL {
        let config = ProtocolConfig::new(alg, nodes, p)?;
        for t in 0..trials {
            let out = Simulation::new(&config)
                .record_trajectory(true)
                .run(&mut RngStream::new(seed, t))?;
            let traj = out.trace.trajectory.as_deref().unwrap_or(&[]);
            let mut ok = out.state.informed().is_subset_of(out.state.active())
                && traj.windows(2).all(|w| w[0] <= w[1])
                && traj.len() as u64 == out.trace.completion_time + 1
                && traj.last() == Some(&(out.state.informed_count() as u64));
            if let Some(d) = out.trace.stage_durations() {
                ok &= d.iter().sum::<u64>() == out.trace.completion_time;
            }
            if let (Some(a), Some(b)) = (
                out.trace.stage_times.t_eps,
                out.trace.stage_times.t_one_minus_eps,
            ) {
                ok &= a <= b;
            }
            if !ok {
                bad.push(format!("{alg}#{t}"));
            }
        }
    }
    Ok(CheckOutcome::new(
        "run invariants",
        bad.is_empty(),
        format!("N={nodes} p={p} trials={trials} per algorithm; failing {bad:?}"),
    ))
}

/// Repeated and serial executions of `spec` render identical bytes.
pub fn determinism(spec: &ExperimentSpec) -> Result<CheckOutcome> {
    let mut passed = true;
    for format in [OutputFormat::Csv, OutputFormat::Json] {
        let a = execute(spec, Execution::Parallel)?.render(format)?;
        let b = execute(spec, Execution::Parallel)?.render(format)?;
        let c = execute(spec, Execution::Serial)?.render(format)?;
        passed &= a == b && a == c;
    }
    Ok(CheckOutcome::new(
        "deterministic output",
        passed,
        format!(
            "{} cells × {} trials, CSV and JSON",
            spec.grid.len(),
            spec.trials_per_cell
        ),
    ))
}
