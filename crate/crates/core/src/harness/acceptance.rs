//! The acceptance criteria as library functions, shared by `verify full`
//! and the `acceptance` test target.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::Result;
use crate::network::{Algorithm, ProtocolConfig};
use crate::protocols::TraceResult;
use crate::theory;

use super::checks::{self, CheckOutcome};
use super::experiment::{execute, run_experiment, Execution};
use super::spec::{Cell, ExperimentSpec, OutputFormat};
use super::stats::mean_sd;
use super::sweep::{convergence_sweep, nonincreasing_trend, run_trials};

pub const SEED: u64 = 0x5eed_2011;
pub const HEADLINE_N: usize = 1 << 20;
pub const HEADLINE_P: f64 = 0.5;
pub const HEADLINE_TRIALS: u64 = 100;
pub const LOWER_BOUND_TRIALS: u64 = 1000;

#[derive(Clone, Debug, Serialize)]
pub struct Criterion {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Criterion {
    fn new(id: u8, title: &'static str, passed: bool, detail: String) -> Self {
        Criterion {
            id,
            title,
            passed,
            detail,
        }
    }

    fn from_checks(id: u8, title: &'static str, outcomes: &[CheckOutcome]) -> Self {
        let passed = outcomes.iter().all(|c| c.passed);
        let detail = outcomes
            .iter()
            .map(|c| c.detail.as_str())
            .collect::<Vec<_>>()
            .join(" | ");
        Criterion::new(id, title, passed, detail)
    }

    pub fn line(&self) -> String {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        format!(
            "criterion {:>2} [{mark}] {}: {}",
            self.id, self.title, self.detail
        )
    }
}

/// Coupled runs of the three protocols at the headline size: trial `t` of
/// every protocol uses stream `t`, so all see the same active set.
pub struct Headline {
    pub runs: Vec<(Algorithm, Vec<TraceResult>)>,
    /// Wall time of the first [`HEADLINE_TRIALS`] trials per protocol.
    pub elapsed: Vec<Duration>,
}

impl Headline {
    pub fn run(trials: u64) -> Result<Self> {
        let mut runs = Vec::new();
        let mut elapsed = Vec::new();
        for alg in Algorithm::PROTOCOLS {
            let config = ProtocolConfig::new(alg, HEADLINE_N, HEADLINE_P)?;
            let first = trials.min(HEADLINE_TRIALS);
            let start = Instant::now();
            let mut traces = run_trials(&config, SEED, 0, first)?;
            elapsed.push(start.elapsed());
            traces.extend(run_trials(&config, SEED, first, trials - first)?);
            runs.push((alg, traces));
        }
        Ok(Headline { runs, elapsed })
    }

    fn traces(&self, alg: Algorithm) -> &[TraceResult] {
        let all = &self
            .runs
            .iter()
            .find(|(a, _)| *a == alg)
            .expect("protocol run")
            .1;
        &all[..all.len().min(HEADLINE_TRIALS as usize)]
    }

    fn elapsed(&self, alg: Algorithm) -> Duration {
        let i = Algorithm::PROTOCOLS
            .iter()
            .position(|&a| a == alg)
            .expect("protocol");
        self.elapsed[i]
    }
}

fn mean_normalized(traces: &[TraceResult]) -> f64 {
    let xs: Vec<f64> = traces
        .iter()
        .map(|t| t.normalized_time().unwrap_or(f64::NAN))
        .collect();
    mean_sd(&xs).0
}

fn constant_criterion(
    id: u8,
    title: &'static str,
    headline: &Headline,
    alg: Algorithm,
    band: (f64, f64),
    beats: Option<Algorithm>,
) -> Criterion {
    let traces = headline.traces(alg);
    let c = theory::constant(alg, HEADLINE_P).expect("p in range");
    let m = mean_normalized(traces);
    let ratio = m / c;
    let caps = traces.iter().filter(|t| t.cap_hit).count();
    let mut passed = caps == 0 && ratio >= band.0 && ratio <= band.1;
    let mut detail = format!(
        "mean T/ln N {m:.4} vs C(p) {c:.4}, ratio {ratio:.4} in [{}, {}], cap hits {caps}",
        band.0, band.1
    );
    if let Some(other) = beats {
        let rival = headline.traces(other);
        let wins = traces
            .iter()
            .zip(rival)
            .filter(|(a, b)| a.completion_time < b.completion_time)
            .count();
        passed &= wins >= 95;
        let rival_mean = mean_sd(
            &rival
                .iter()
                .map(|t| t.completion_time as f64)
                .collect::<Vec<_>>(),
        )
        .0;
        let below_mean = traces
            .iter()
            .filter(|t| (t.completion_time as f64) < rival_mean)
            .count();
        detail += &format!(
            "; faster than {other} in {wins}/{} coupled trials (need 95), below its mean {rival_mean:.2} in {below_mean}",
            traces.len()
        );
    }
    if alg == Algorithm::Naive {
        let secs = headline.elapsed(alg).as_secs_f64();
        passed &= secs <= 300.0;
        detail += &format!("; {secs:.1}s");
    }
    Criterion::new(id, title, passed, detail)
}

pub fn criterion_1(h: &Headline) -> Criterion {
    constant_criterion(1, "naive constant", h, Algorithm::Naive, (0.8, 1.2), None)
}

pub fn criterion_2(h: &Headline) -> Criterion {
    constant_criterion(
        2,
        "cyclic constant",
        h,
        Algorithm::Cyclic,
        (0.8, 1.2),
        Some(Algorithm::Naive),
    )
}

pub fn criterion_3(h: &Headline) -> Criterion {
    constant_criterion(
        3,
        "improved cyclic constant",
        h,
        Algorithm::ImprovedCyclic,
        (0.8, 1.25),
        Some(Algorithm::Cyclic),
    )
}

pub fn criterion_4(h: &Headline) -> Criterion {
    let times: Vec<(Algorithm, Vec<u64>)> = h
        .runs
        .iter()
        .map(|(a, ts)| (*a, ts.iter().map(|t| t.completion_time).collect()))
        .collect();
    let outcome = checks::lower_bound_envelope(&times, HEADLINE_N, HEADLINE_P, 6.0);
    Criterion::from_checks(4, "completion lower bound", &[outcome])
}

pub fn criterion_5(trials: u64) -> Result<Criterion> {
    let ladder = [1 << 14, 1 << 17, 1 << 20];
    let mut passed = true;
    let mut parts = Vec::new();
    for alg in Algorithm::ALL {
        let points = convergence_sweep(alg, HEADLINE_P, &ladder, trials, SEED)?;
        let ratios = points
            .iter()
            .map(|p| format!("{:.3}±{:.3}", p.ratio, p.se_ratio))
            .collect::<Vec<_>>()
            .join(" → ");
        if alg == Algorithm::Oracle {
            parts.push(format!("{alg} {ratios} (reference)"));
            continue;
        }
        let ok = nonincreasing_trend(&points, 1.25);
        passed &= ok;
        parts.push(format!(
            "{alg} {ratios} {}",
            if ok { "ok" } else { "fails" }
        ));
    }
    Ok(Criterion::new(
        5,
        "convergence trend",
        passed,
        parts.join("; "),
    ))
}

pub fn criterion_6() -> Result<Criterion> {
    let start = Instant::now();
    let outcomes = [
        checks::law_match(Algorithm::Oracle, 8, 0.5, 100_000, 0.02, SEED)?,
        checks::law_match(Algorithm::Naive, 2, 0.5, 100_000, 0.02, SEED)?,
        checks::law_match(Algorithm::Naive, 8, 0.5, 100_000, 0.02, SEED)?,
    ];
    let secs = start.elapsed().as_secs_f64();
    let mut c = Criterion::from_checks(6, "exact laws", &outcomes);
    c.passed &= secs <= 60.0;
    c.detail += &format!(" | {secs:.1}s");
    Ok(c)
}

pub fn criterion_7() -> Result<Criterion> {
    let outcome = checks::concentration(1_000_000, 0.5, 1000, SEED)?;
    Ok(Criterion::from_checks(
        7,
        "active-count concentration",
        &[outcome],
    ))
}

pub fn criterion_8() -> Result<Criterion> {
    Ok(Criterion::from_checks(
        8,
        "constant ordering",
        &[checks::constant_ordering()?],
    ))
}

pub fn criterion_9(trials: u64) -> Result<Criterion> {
    let outcomes = [0.3, 0.5, 0.8]
        .iter()
        .map(|&p| checks::domination(1 << 16, p, trials, SEED))
        .collect::<Result<Vec<_>>>()?;
    Ok(Criterion::from_checks(9, "oracle domination", &outcomes))
}

/// Demo spec covering every algorithm, writing under `dir`.
pub fn demo_spec(dir: &std::path::Path, format: OutputFormat) -> ExperimentSpec {
    let grid = Algorithm::ALL
        .iter()
        .flat_map(|&algorithm| {
            [(1 << 10, 0.5), (300, 0.8)].map(|(nodes, p)| Cell {
                algorithm,
                nodes,
                p,
            })
        })
        .collect();
    ExperimentSpec {
        grid,
        trials_per_cell: 20,
        base_seed: SEED,
        record_trajectory: true,
        epsilon: 0.1,
        output_path: dir.join(match format {
            OutputFormat::Csv => "trials.csv",
            OutputFormat::Json => "trials.json",
        }),
        format,
    }
}

pub fn criterion_10() -> Result<Criterion> {
    let dir = tempfile::tempdir()?;
    let spec = demo_spec(dir.path(), OutputFormat::Csv);
    run_experiment(&spec)?;
    let first = std::fs::read(&spec.output_path)?;
    run_experiment(&spec)?;
    let second = std::fs::read(&spec.output_path)?;
    let serial = execute(&spec, Execution::Serial)?.render(OutputFormat::Csv)?;
    let passed = first == second && first == serial;
    Ok(Criterion::new(
        10,
        "byte-identical reruns",
        passed,
        format!(
            "{} rows, {} bytes; rerun {}, serial {}",
            spec.grid.len() as u64 * spec.trials_per_cell,
            first.len(),
            if first == second {
                "identical"
            } else {
                "differs"
            },
            if first == serial {
                "identical"
            } else {
                "differs"
            },
        ),
    ))
}

/// Every criterion at full size, in order.
pub fn run_all(mut report: impl FnMut(&Criterion)) -> Result<Vec<Criterion>> {
    let mut out = Vec::new();
    let mut push = |c: Criterion| {
        report(&c);
        out.push(c);
    };
    let headline = Headline::run(LOWER_BOUND_TRIALS)?;
    push(criterion_1(&headline));
    push(criterion_2(&headline));
    push(criterion_3(&headline));
    push(criterion_4(&headline));
    drop(headline);
    push(criterion_5(HEADLINE_TRIALS)?);
    push(criterion_6()?);
    push(criterion_7()?);
    push(criterion_8()?);
    push(criterion_9(500)?);
    push(criterion_10()?);
    Ok(out)
}
