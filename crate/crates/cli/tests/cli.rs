use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const HEADER: &str =
    "episode,seed,env,solver,budget_kind,budget,total_reward,plan_seconds_mean,first_action,distance_to_opt,steps,termination";

fn vpw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vpw")).args(args).output().unwrap()
}

fn small_run(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "run", "--env", "lqg", "--solver", "pomcpow", "--queries", "20", "--episodes", "3",
        "--particles", "100", "--no-timing", "--out", out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    vpw(&args)
}

#[test]
fn run_writes_results_summary_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let o = small_run(&out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], HEADER);
    assert_eq!(lines.len(), 4);
    assert!(out.join("summary.csv").exists());
    let cfg: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(cfg["spec"]["solver"], "pomcpow");
    assert_eq!(cfg["solver_config_resolved"]["vpw"]["c"], 65.0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("total_reward"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(small_run(&a, &["--threads", "1"]).status.success());
    assert!(small_run(&b, &["--threads", "3"]).status.success());
    assert_eq!(fs::read(a.join("results.csv")).unwrap(), fs::read(b.join("results.csv")).unwrap());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    fs::write(&cfg, r#"{"env": "lqg", "solver": "vomcpow", "episodes": 5, "seed": 7, "queries": [10], "particles": 50}"#).unwrap();
    let out = dir.path().join("o");
    let o = vpw(&["run", "--config", cfg.to_str().unwrap(), "--episodes", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    let seeds: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(seeds, ["7", "8"]);
    let echoed: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(echoed["spec"]["episodes"], 2);
    assert_eq!(echoed["spec"]["seed"], 7);
}

#[test]
fn validation_failures_exit_nonzero() {
    for args in [
        &["run", "--env", "mars"][..],
        &["run", "--env", "lqg", "--solver", "voss"],
        &["run", "--env", "lqg", "--preset", "lander-pomcpow"],
        &["run", "--preset", "no-such-preset"],
        &["sweep-vowss", "--state-widths", "0", "--episodes", "1"],
    ] {
        let o = vpw(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"env": "lqg", "episodez": 3}"#).unwrap();
    assert_eq!(vpw(&["run", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn summarize_reads_results_and_rejects_other_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    assert!(small_run(&out, &[]).status.success());
    let table = dir.path().join("s.csv");
    let o = vpw(&["summarize", out.join("results.csv").to_str().unwrap(), "--group-by", "solver", "--out", table.to_str().unwrap()]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("pomcpow") && text.contains("distance_to_opt"));
    assert!(fs::read_to_string(&table).unwrap().starts_with("group,metric,mean,stderr,count"));

    let bogus = dir.path().join("bogus.csv");
    fs::write(&bogus, "a,b\n1,2\n").unwrap();
    assert_eq!(vpw(&["summarize", bogus.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn sweep_writes_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let o = vpw(&[
        "sweep-vowss", "--state-widths", "2", "--action-widths", "5,10", "--episodes", "3", "--no-timing",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let sweep = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 3);
    assert!(sweep.lines().nth(2).unwrap().starts_with("2,10,3,"));
    assert_eq!(fs::read_to_string(out.join("results.csv")).unwrap().lines().count(), 7);
}

#[test]
fn tune_writes_histories_and_best_configs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t");
    let o = vpw(&[
        "tune", "--env", "lqg", "--queries", "10", "--particles", "50", "--population", "4", "--iterations", "1",
        "--eval-episodes", "2", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let best: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("best.json")).unwrap()).unwrap();
    assert!(best["vomcpow"]["config"]["vpw"]["voo"]["omega"].is_number());
    assert_eq!(fs::read_to_string(out.join("pomcpow_history.csv")).unwrap().lines().count(), 2);
    assert!(fs::read_to_string(out.join("vomcpow_history.csv")).unwrap().lines().next().unwrap().ends_with("omega"));
}
