use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use rumorsim::harness::{self, Execution, ExperimentSpec, Level, SummaryStats};
use rumorsim::theory::{self, TheoryConstants};
use rumorsim::{Algorithm, Error};

#[derive(Parser)]
#[command(
    name = "rumorsim",
    version,
    about = "Push broadcast on networks with failed nodes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment spec and write its raw trials.
    Run {
        spec: PathBuf,
        /// Run trials on one thread (the output is identical).
        #[arg(long)]
        serial: bool,
        /// Print the summaries as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Normalized completion time over a geometric ladder of sizes.
    Sweep {
        #[arg(long, short)]
        algorithm: Algorithm,
        #[arg(long, short, default_value_t = 0.5)]
        p: f64,
        /// Smallest size as a power of two.
        #[arg(long, default_value_t = 10)]
        from_exp: u32,
        /// Largest size as a power of two.
        #[arg(long, default_value_t = 16)]
        to_exp: u32,
        /// Exponent step between rungs.
        #[arg(long, default_value_t = 2)]
        step: u32,
        #[arg(long, short, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Print the running-time constants on a grid of p.
    Theory {
        /// Explicit values of p; defaults to 0.05, 0.10, …, 0.95.
        #[arg(long, short, value_delimiter = ',')]
        p: Vec<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Run the property checks.
    Verify {
        #[arg(value_enum, default_value_t = VerifyLevel::Quick)]
        level: VerifyLevel,
        #[arg(long)]
        json: bool,
    },
    /// Dump the exact completion-time law for a small network.
    OracleLaw {
        #[arg(long, short = 'n')]
        nodes: usize,
        #[arg(long, short, default_value_t = 0.5)]
        p: f64,
        /// `oracle` or `naive`.
        #[arg(long, short, default_value = "oracle")]
        algorithm: Algorithm,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyLevel {
    Quick,
    Full,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}

fn run(command: Command) -> Result<bool, Error> {
    match command {
        Command::Run { spec, serial, json } => {
            let mut spec = ExperimentSpec::load(&spec)?;
            if spec.output_path.is_relative() {
                // relative output paths are taken from the working directory
                spec.output_path = std::env::current_dir()?.join(&spec.output_path);
            }
            let summaries = if serial {
                let out = harness::execute(&spec, Execution::Serial)?;
                harness::write_atomic(&spec.output_path, &out.render(spec.format)?)?;
                out.summaries
            } else {
                harness::run_experiment(&spec)?
            };
            if json {
                println!("{}", serde_json::to_string_pretty(&summaries)?);
            } else {
                print_summaries(&summaries);
                eprintln!("wrote {}", spec.output_path.display());
            }
            Ok(true)
        }
        Command::Sweep {
            algorithm,
            p,
            from_exp,
            to_exp,
            step,
            trials,
            seed,
            json,
        } => {
            if step == 0 || from_exp >= to_exp || to_exp > 31 {
                return Err(Error::InvalidConfig(
                    "need 0 < step and from_exp < to_exp ≤ 31".into(),
                ));
            }
            let ladder: Vec<usize> = (from_exp..=to_exp)
                .step_by(step as usize)
                .map(|e| 1usize << e)
                .collect();
            let points = harness::convergence_sweep(algorithm, p, &ladder, trials, seed)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&points)?);
            } else {
                println!(
                    "{:>10} {:>10} {:>12} {:>10} {:>8}",
                    "N", "mean T", "T/ln N", "ratio", "caps"
                );
                for pt in &points {
                    println!(
                        "{:>10} {:>10.3} {:>12.4} {:>10.4} {:>8}",
                        pt.nodes, pt.mean_time, pt.mean_normalized, pt.ratio, pt.cap_hits
                    );
                }
            }
            Ok(true)
        }
        Command::Theory { p, json } => {
            let grid = if p.is_empty() {
                (1..20).map(|i| i as f64 * 0.05).collect()
            } else {
                p
            };
            let rows = grid
                .iter()
                .map(|&p| TheoryConstants::at(p))
                .collect::<Result<Vec<_>, _>>()?;
            if json {
                println!("{}", serde_json::to_string_pretty(&rows)?);
            } else {
                println!(
                    "{:>6} {:>10} {:>10} {:>10} {:>10} {:>10}",
                    "p", "naive", "cyclic", "improved", "lower", "f(p)"
                );
                for c in &rows {
                    println!(
                        "{:>6.3} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
                        c.p,
                        c.c_naive,
                        c.c_cyclic,
                        c.c_improved,
                        c.lower_bound_c,
                        theory::cyclic_beats_naive(c.p)
                    );
                }
            }
            Ok(true)
        }
        Command::Verify { level, json } => {
            let level = match level {
                VerifyLevel::Quick => Level::Quick,
                VerifyLevel::Full => Level::Full,
            };
            let report = harness::verify_suite(level, |c| {
                if !json {
                    let mark = if c.passed { "ok  " } else { "FAIL" };
                    println!("{mark} {}: {}", c.name, c.detail);
                }
            })?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                let failed = report.failures().count();
                println!("{} checks, {failed} failed", report.checks.len());
            }
            Ok(report.passed())
        }
        Command::OracleLaw {
            nodes,
            p,
            algorithm,
            json,
        } => {
            let law = match algorithm {
                Algorithm::Oracle => theory::exact_oracle_law(nodes, p)?,
                Algorithm::Naive => theory::exact_naive_law(nodes, p)?,
                other => {
                    return Err(Error::InvalidConfig(format!("no exact law for {other}")));
                }
            };
            if json {
                println!("{}", serde_json::to_string_pretty(&law)?);
            } else {
                println!("# {algorithm} N={nodes} p={p} mean={:.6}", law.mean());
                println!("{:>6} {:>22} {:>22}", "t", "P(T=t)", "P(T<=t)");
                for (&t, &pr) in law.support.iter().zip(&law.probabilities) {
                    println!("{t:>6} {pr:>22.15e} {:>22.15}", law.cdf(t));
                }
            }
            Ok(true)
        }
    }
}

fn print_summaries(summaries: &[SummaryStats]) {
    println!(
        "{:<15} {:>9} {:>5} {:>6} {:>8} {:>7} {:>6} {:>6} {:>6} {:>8} {:>7} {:>5}",
        "algorithm",
        "N",
        "p",
        "trials",
        "mean T",
        "sd",
        "q05",
        "q50",
        "q95",
        "T/ln N",
        "ratio",
        "caps"
    );
    let opt = |x: Option<f64>, w: usize| match x {
        Some(v) => format!("{v:>w$.4}"),
        None => format!("{:>w$}", "-"),
    };
    for s in summaries {
        println!(
            "{:<15} {:>9} {:>5} {:>6} {:>8.3} {:>7.3} {:>6.2} {:>6.2} {:>6.2} {} {} {:>5}",
            s.algorithm.name(),
            s.nodes,
            s.p,
            s.trials,
            s.mean,
            s.stddev,
            s.q05,
            s.q50,
            s.q95,
            opt(s.mean_normalized, 8),
            opt(s.ratio, 7),
            s.cap_hits
        );
    }
}
