use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bionet(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bionet"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("an error line");
    serde_json::from_str(line).expect("stderr is JSON")
}

const SMALL_RUN: &str = r#"
name = "small"
[geometry]
preset = "small-diamond:16"
[energy]
gamma = 0.5
[dynamics]
rate_tol = 1e-3
[init]
kind = "noisy"
seed = 4
"#;

#[test]
fn run_writes_artifacts_and_report() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("small.toml"), SMALL_RUN).unwrap();
    let out = bionet(
        &["run", "--config", "small.toml", "--out", "res"],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = stdout_json(&out);
    assert_eq!(report["name"], "small");
    assert!(report["classification"]["kind"].is_string());
    for f in [
        "trajectory.csv",
        "network.txt",
        "plot.csv",
        "config.toml",
        "report.json",
    ] {
        assert!(dir.path().join("res").join(f).is_file(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("res/trajectory.csv")).unwrap();
    assert!(csv
        .starts_with("iter,E_total,E_pumping,E_metabolic,tau_accepted,n_active_edges,n_cycles\n"));
}

#[test]
fn same_seed_gives_identical_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("small.toml"), SMALL_RUN).unwrap();
    for out in ["a", "b", "c"] {
        let seed = if out == "c" { "5" } else { "4" };
        let o = bionet(
            &[
                "run",
                "--config",
                "small.toml",
                "--seed",
                seed,
                "--out",
                out,
            ],
            dir.path(),
        );
        assert!(o.status.success());
    }
    let read = |d: &str| std::fs::read(dir.path().join(d).join("trajectory.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));
}

#[test]
fn preset_flag_overrides_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let out = bionet(
        &["run", "--preset", "small-diamond:9", "--gamma", "1.5"],
        dir.path(),
    );
    assert!(out.status.success());
    let report = stdout_json(&out);
    assert_eq!(report["final_conductivities"].as_array().unwrap().len(), 16);
}

#[test]
fn sweep_keeps_order_and_records_failures() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = r#"
[[scenario]]
name = "tree"
geometry = { preset = "small-diamond:9" }
energy = { gamma = 0.5 }
dynamics = { rate_tol = 1e-3 }

[[scenario]]
name = "broken"
geometry = { file = "missing.txt" }
energy = { gamma = 0.5 }

[[scenario]]
name = "loops"
geometry = { preset = "small-diamond:9" }
energy = { gamma = 1.5 }
"#;
    std::fs::write(dir.path().join("sweep.toml"), sweep).unwrap();
    let out = bionet(
        &[
            "sweep",
            "--config",
            "sweep.toml",
            "--parallel",
            "2",
            "--out",
            "res",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let reports = stdout_json(&out);
    let names: Vec<_> = reports
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["name"].clone())
        .collect();
    assert_eq!(names, ["tree", "broken", "loops"]);
    assert!(reports[1]["error"]
        .as_str()
        .unwrap()
        .contains("missing.txt"));
    assert_eq!(reports[0]["classification"]["kind"], "tree");
    assert_eq!(reports[2]["classification"]["kind"], "network");
    assert_eq!(stderr_json(&out)["failed"], 1);
    assert!(dir.path().join("res/000_tree/trajectory.csv").is_file());
    assert!(dir.path().join("res/002_loops/trajectory.csv").is_file());
    assert!(dir.path().join("res/sweep.json").is_file());
}

#[test]
fn pde_run_reports_dissipation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[grid]\ncells = 8\n[pde]\nfinal_time = 4e-3\nsnapshot_every = 2\n";
    std::fs::write(dir.path().join("pde.toml"), cfg).unwrap();
    let out = bionet(&["pde", "--config", "pde.toml", "--out", "res"], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = stdout_json(&out);
    assert_eq!(report["steps"], 4);
    assert!(report["max_dissipation_excess"].as_f64().unwrap() <= 1e-8);
    assert!(dir.path().join("res/trace.csv").is_file());
    assert!(dir.path().join("res/snapshots/manifest.json").is_file());
}

#[test]
fn bridge_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = bionet(&["bridge", "--out", "res"], dir.path());
    assert!(out.status.success());
    let report = stdout_json(&out);
    assert!(report["uniform_weight_deviation"].as_f64().unwrap() <= 1e-5);
    let csv = std::fs::read_to_string(dir.path().join("res/kirchhoff_1d.csv")).unwrap();
    assert!(csv.starts_with("h,residual,fitted_order\n"));
}

#[test]
fn errors_are_machine_readable() {
    let dir = tempfile::tempdir().unwrap();
    let out = bionet(&["run", "--config", "absent.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_json(&out);
    assert_eq!(err["status"], "error");
    assert_eq!(err["kind"], "io");

    std::fs::write(
        dir.path().join("bad.toml"),
        "[energy]\ngamma = 0.5\nunknown = 1\n",
    )
    .unwrap();
    let out = bionet(&["run", "--config", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["kind"], "config");

    let out = bionet(&["run", "--preset", "hexagon"], dir.path());
    assert!(!out.status.success());
}

#[test]
fn bundled_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let run = bionet::experiments::ScenarioConfig::read(dir.join("diamond-tree.toml")).unwrap();
    assert_eq!(run.energy.gamma, 0.5);
    let sweep = bionet::experiments::SweepConfig::read(dir.join("phase-sweep.toml")).unwrap();
    assert_eq!(sweep.scenarios.len(), 3);
    let pde = bionet::experiments::PdeScenario::read(dir.join("pde.toml")).unwrap();
    assert_eq!(pde.grid.cells, 32);
}
