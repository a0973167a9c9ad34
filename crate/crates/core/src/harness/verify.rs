use serde::Serialize;

use crate::error::Result;
use crate::network::{Algorithm, ProtocolConfig, RngStream};
use crate::protocols::{step_naive, OracleStepper};

use super::acceptance;
use super::checks::{self, CheckOutcome};
use super::spec::OutputFormat;
use super::sweep::run_trials;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Level {
    Quick,
    Full,
}

impl std::str::FromStr for Level {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            _ => Err(crate::Error::config(format!("unknown verify level {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub level: Level,
    pub checks: Vec<CheckOutcome>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

const SEED: u64 = 0xc0ffee;

/// Runs the property checks; `Full` adds every acceptance criterion at its
/// full size. `report` sees each outcome as soon as it is known.
pub fn verify_suite(level: Level, mut report: impl FnMut(&CheckOutcome)) -> Result<Report> {
    let mut out = Vec::new();
    let mut push = |c: CheckOutcome| {
        report(&c);
        out.push(c);
    };

    push(checks::naive_step_law(step_naive, 20_000, SEED)?);
    push(checks::oracle_growth(
        || {
            let mut stepper = OracleStepper::new();
            move |s: &mut _, _: &mut RngStream| stepper.step(s)
        },
        1 << 14,
        0.5,
        10,
        4000,
        SEED,
    )?);
    push(checks::law_match(
        Algorithm::Oracle,
        8,
        0.5,
        100_000,
        0.02,
        SEED,
    )?);
    push(checks::law_match(
        Algorithm::Naive,
        2,
        0.5,
        100_000,
        0.02,
        SEED,
    )?);
    push(checks::law_match(
        Algorithm::Naive,
        8,
        0.5,
        100_000,
        0.02,
        SEED,
    )?);
    push(checks::exact_law_ordering(12, &[0.3, 0.5, 0.8])?);
    for p in [0.3, 0.5, 0.8] {
        push(checks::domination(1 << 12, p, 100, SEED)?);
    }
    push(checks::concentration(100_000, 0.5, 1000, SEED)?);
    let n = 1 << 14;
    let times = Algorithm::PROTOCOLS
        .iter()
        .map(|&alg| {
            let config = ProtocolConfig::new(alg, n, 0.5)?;
            let ts = run_trials(&config, SEED, 0, 200)?;
            Ok((alg, ts.iter().map(|t| t.completion_time).collect()))
        })
        .collect::<Result<Vec<_>>>()?;
    push(checks::lower_bound_envelope(&times, n, 0.5, 6.0));
    push(checks::constant_ordering()?);
    push(checks::run_invariants(200, 0.5, 20, SEED)?);
    let dir = tempfile::tempdir()?;
    let mut spec = acceptance::demo_spec(dir.path(), OutputFormat::Csv);
    spec.trials_per_cell = 5;
    push(checks::determinism(&spec)?);

    if level == Level::Full {
        acceptance::run_all(|c| {
            push(CheckOutcome {
                name: format!("criterion {}: {}", c.id, c.title),
                passed: c.passed,
                detail: c.detail.clone(),
            })
        })?;
    }
    Ok(Report { level, checks: out })
}
