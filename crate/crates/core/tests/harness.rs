use std::path::Path;
use std::process::Command;

use rumorsim::harness::{
    self, acceptance, convergence_sweep, execute, run_experiment, Cell, Execution, ExperimentSpec,
    OutputFormat,
};
use rumorsim::theory;
use rumorsim::{Algorithm, Error};

fn spec(dir: &Path, grid: Vec<Cell>, trials: u64, format: OutputFormat) -> ExperimentSpec {
    ExperimentSpec {
        grid,
        trials_per_cell: trials,
        base_seed: 42,
        record_trajectory: false,
        epsilon: 0.1,
        output_path: dir.join("out"),
        format,
    }
}

fn cell(algorithm: Algorithm, nodes: usize, p: f64) -> Cell {
    Cell {
        algorithm,
        nodes,
        p,
    }
}

#[test]
fn single_node_cell_completes_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec(
        dir.path(),
        vec![cell(Algorithm::Naive, 1, 0.5)],
        10,
        OutputFormat::Csv,
    );
    let summaries = run_experiment(&s).unwrap();
    let stats = &summaries[0];
    assert_eq!(stats.trials, 10);
    assert_eq!((stats.mean, stats.min, stats.max), (0.0, 0.0, 0.0));
    assert_eq!(stats.mean_normalized, None);
    assert_eq!(stats.cap_hits, 0);

    let text = std::fs::read_to_string(&s.output_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "trial_id,algorithm,N,p,seed,stream_id,n_active,phase1_end,t_eps,t_one_minus_eps,T_n,cap_hit"
    );
    assert_eq!(lines.next().unwrap(), "0,Naive,1,0.5,42,0,1,,0,0,0,false");
    assert_eq!(lines.count(), 9);
}

#[test]
fn rows_follow_the_stream_convention() {
    let dir = tempfile::tempdir().unwrap();
    let grid = vec![
        cell(Algorithm::Cyclic, 500, 0.5),
        cell(Algorithm::ImprovedCyclic, 500, 0.3),
    ];
    let s = spec(dir.path(), grid, 4, OutputFormat::Csv);
    let out = execute(&s, Execution::Serial).unwrap();
    assert_eq!(out.rows.len(), 8);
    for (i, row) in out.rows.iter().enumerate() {
        assert_eq!(row.stream_id, i as u64);
        assert_eq!(row.trial_id, i as u64 % 4);
        assert!(row.phase1_end.is_some());
    }
    // a row reproduces on its own
    let config = s.cell_config(1).unwrap();
    let again = rumorsim::run_protocol(&config, &mut rumorsim::RngStream::new(42, 6)).unwrap();
    assert_eq!(again.completion_time, out.rows[6].completion_time);
    assert_eq!(again.n_active, out.rows[6].n_active);
}

#[test]
fn floats_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = 0.1 + 0.2;
    let s = spec(
        dir.path(),
        vec![cell(Algorithm::Oracle, 64, p)],
        2,
        OutputFormat::Csv,
    );
    run_experiment(&s).unwrap();
    let mut reader = csv::Reader::from_path(&s.output_path).unwrap();
    for rec in reader.records() {
        let rec = rec.unwrap();
        assert_eq!(rec[3].parse::<f64>().unwrap(), p);
    }
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let s = acceptance::demo_spec(dir.path(), OutputFormat::Csv);
    let outcome = harness::checks::determinism(&s).unwrap();
    assert!(outcome.passed, "{}", outcome.detail);
    run_experiment(&s).unwrap();
    let a = std::fs::read(&s.output_path).unwrap();
    run_experiment(&s).unwrap();
    assert_eq!(a, std::fs::read(&s.output_path).unwrap());
}

#[test]
fn json_output_carries_summaries_and_small_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = spec(
        dir.path(),
        vec![
            cell(Algorithm::Naive, 256, 0.5),
            cell(Algorithm::Naive, (1 << 16) + 1, 0.9),
        ],
        2,
        OutputFormat::Json,
    );
    s.record_trajectory = true;
    let summaries = run_experiment(&s).unwrap();
    let doc: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&s.output_path).unwrap()).unwrap();
    assert_eq!(doc["summaries"].as_array().unwrap().len(), 2);
    let trials = doc["trials"].as_array().unwrap();
    assert_eq!(trials.len(), 4);
    let traj = trials[0]["trajectory"].as_array().unwrap();
    assert_eq!(traj.len() as u64, trials[0]["T_n"].as_u64().unwrap() + 1);
    assert!(trials[2].get("trajectory").is_none());
    assert_eq!(
        doc["summaries"][0]["mean"].as_f64().unwrap(),
        summaries[0].mean
    );
}

#[test]
fn summaries_are_coherent() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec(
        dir.path(),
        vec![cell(Algorithm::Naive, 4096, 0.5)],
        60,
        OutputFormat::Csv,
    );
    let stats = &execute(&s, Execution::Parallel).unwrap().summaries[0];
    assert!(stats.min <= stats.q05 && stats.q05 <= stats.q50);
    assert!(stats.q50 <= stats.q95 && stats.q95 <= stats.max);
    let c = theory::constant(Algorithm::Naive, 0.5).unwrap();
    assert_eq!(stats.theory_constant, c);
    let ratio = stats.ratio.unwrap();
    assert!((ratio - stats.mean_normalized.unwrap() / c).abs() < 1e-12);
    let stages = stats.stage_means.unwrap();
    assert_eq!(stats.stage_trials, 60);
    assert!((stages.iter().sum::<f64>() - stats.mean).abs() < 1e-9);
    let nominal = stats.nominal_stage1.unwrap();
    assert!((nominal - (0.1f64 * 0.5 * 4096.0).ln() / 1.5f64.ln()).abs() < 1e-12);
}

#[test]
fn failures_leave_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = spec(
        dir.path(),
        vec![cell(Algorithm::Naive, 8, 0.5)],
        2,
        OutputFormat::Csv,
    );
    s.output_path = dir.path().join("missing").join("out.csv");
    let err = run_experiment(&s).unwrap_err();
    assert!(matches!(err, Error::Output { .. }), "{err}");
    assert!(!err.is_config());

    s.output_path = dir.path().join("out.csv");
    s.grid.push(cell(Algorithm::Naive, 8, 2.0));
    assert!(run_experiment(&s).unwrap_err().is_config());
    assert!(!s.output_path.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn sweep_is_coupled_across_algorithms() {
    let ladder = [1 << 8, 1 << 10, 1 << 12];
    let naive = convergence_sweep(Algorithm::Naive, 0.5, &ladder, 30, 5).unwrap();
    let improved = convergence_sweep(Algorithm::ImprovedCyclic, 0.5, &ladder, 30, 5).unwrap();
    for (a, b) in naive.iter().zip(&improved) {
        assert_eq!(a.nodes, b.nodes);
        assert!(a.mean_normalized >= b.mean_normalized, "N={}", a.nodes);
    }
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rumorsim"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("x.csv");
    let good = format!(
        r#"{{"grid": [{{"algorithm": "Cyclic", "N": 256, "p": 0.5}}], "trials_per_cell": 3,
            "base_seed": 1, "record_trajectory": false, "epsilon": 0.1,
            "output_path": {:?}, "format": "CSV"}}"#,
        out_path
    );
    let spec_path = dir.path().join("spec.json");
    std::fs::write(&spec_path, &good).unwrap();
    let run = cli(&["run", spec_path.to_str().unwrap()]);
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert_eq!(
        std::fs::read_to_string(&out_path).unwrap().lines().count(),
        4
    );

    std::fs::write(
        &spec_path,
        good.replace("\"epsilon\"", "\"bogus\": 1, \"epsilon\""),
    )
    .unwrap();
    assert_eq!(
        cli(&["run", spec_path.to_str().unwrap()]).status.code(),
        Some(2)
    );
    assert_eq!(cli(&["oracle-law", "-n", "100"]).status.code(), Some(2));
    assert_eq!(
        cli(&["sweep", "-a", "naive", "-p", "3"]).status.code(),
        Some(2)
    );

    let law = cli(&["oracle-law", "-n", "8", "-p", "1"]);
    assert_eq!(law.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&law.stdout).contains("mean=3.000000"));
    let theory = cli(&["theory", "-p", "0.5", "--json"]);
    let rows: serde_json::Value = serde_json::from_slice(&theory.stdout).unwrap();
    assert!((rows[0]["c_naive"].as_f64().unwrap() - 4.466303).abs() < 1e-6);
}
