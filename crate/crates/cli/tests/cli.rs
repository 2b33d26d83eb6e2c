use housealloc::{Allocation, Instance};
use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_housealloc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("housealloc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// The allocation in `out` must load against the instance file.
fn revalidates(out: &Output, instance: &str) -> Allocation {
    let inst = Instance::load(instance).unwrap();
    let v = stdout_json(out);
    Allocation::from_json(&v["allocation"].to_string(), &inst).expect("allocation re-validates")
}

#[test]
fn solve_shared_peak() {
    let inst = fixture("shared_peak.json");
    let out = run(&["solve", "--instance", &inst, "--method", "peaked", "--axis-required"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["value"], 1);
    revalidates(&out, &inst);
}

#[test]
fn solve_oracle_total() {
    let inst = fixture("five_agents.json");
    let out = run(&["solve", "--instance", &inst, "--measure", "total"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["value"], 0);
}

#[test]
fn zero_budget_refine_echoes_input() {
    let inst = fixture("five_agents.json");
    let base = fixture("five_agents_base.json");
    let out = run(&[
        "refine", "--instance", &inst, "--alloc", &base, "--q", "0", "--k", "0", "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let a = revalidates(&out, &inst);
    assert_eq!(a.houses(), &[0, 1, 2, 3, 4]);
}

#[test]
fn exhaustive_refine_clears_five_agents() {
    let inst = fixture("five_agents.json");
    let base = fixture("five_agents_base.json");
    let out = run(&[
        "refine", "--instance", &inst, "--alloc", &base, "--q", "5", "--k", "5", "--mode", "exhaustive",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["value"], 0);
    revalidates(&out, &inst);
}

#[test]
fn infeasible_refine_exits_one() {
    let inst = fixture("five_agents.json");
    let base = fixture("five_agents_base.json");
    let out = run(&[
        "refine", "--instance", &inst, "--alloc", &base, "--q", "4", "--k", "4", "--mode", "exhaustive",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out), "infeasible");
}

#[test]
fn randomized_refine_needs_a_seed() {
    let inst = fixture("five_agents.json");
    let base = fixture("five_agents_base.json");
    let out = run(&["refine", "--instance", &inst, "--alloc", &base, "--q", "2", "--k", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn seeded_runs_are_byte_identical() {
    let inst = scratch("same.json");
    let inst = inst.to_str().unwrap();
    assert!(run(&["gen", "--model", "uniform", "--n", "4", "--m", "6", "--seed", "11", "--out", inst]).status.success());
    let base = scratch("same_base.json");
    let w = run(&["welfare", "--instance", inst, "--objective", "util"]);
    std::fs::write(&base, stdout_json(&w)["allocation"].to_string()).unwrap();
    let args = [
        "refine", "--instance", inst, "--alloc", base.to_str().unwrap(), "--q", "3", "--k", "1", "--mode",
        "sampled", "--seed", "5", "--reps", "300",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), b.status.code());
}

#[test]
fn pareto_counterexample_has_none() {
    let out = run(&["pareto", "--instance", &fixture("no_pareto_minimizer.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out), "none exists");
}

#[test]
fn pareto_off_domain_is_a_validation_exit() {
    let out = run(&["pareto", "--instance", &fixture("no_pareto_minimizer.json"), "--domain", "peaked"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pareto_shared_peak() {
    let inst = fixture("shared_peak.json");
    let out = run(&["pareto", "--instance", &inst]);
    assert!(matches!(out.status.code(), Some(0) | Some(1)));
    if out.status.success() {
        revalidates(&out, &inst);
    }
}

#[test]
fn check_reports_witness() {
    let out = run(&[
        "check", "--instance", &fixture("no_pareto_minimizer.json"), "--domain", "peaked", "--axis", "h1,h2,h3,h4",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v = stdout_json(&out);
    assert_eq!(v["valid"], false);
    assert_eq!(v["witness"]["agent"], "i2");
    let ok = run(&["check", "--instance", &fixture("shared_peak.json"), "--domain", "peaked"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(stdout_json(&ok)["valid"], true);
}

#[test]
fn welfare_on_ordinal_is_rejected() {
    let out = run(&["welfare", "--instance", &fixture("five_agents.json"), "--objective", "nash"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_peaked_round_trips_through_check() {
    let path = scratch("peaked.json");
    let p = path.to_str().unwrap();
    assert!(run(&["gen", "--model", "peaked", "--n", "5", "--m", "9", "--seed", "3", "--out", p]).status.success());
    let out = run(&["check", "--instance", p, "--domain", "peaked"]);
    assert_eq!(out.status.code(), Some(0));
    let solved = run(&["solve", "--instance", p, "--method", "peaked"]);
    revalidates(&solved, p);
}

#[test]
fn malformed_instance_exits_two() {
    let path = scratch("bad.json");
    std::fs::write(&path, "{\"n\": 2, \"m\": 1}").unwrap();
    let out = run(&["solve", "--instance", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_domain_writes_csv() {
    let dir = scratch("bench");
    let out = run(&[
        "bench", "domain", "--n", "3", "--m-min", "3", "--m-max", "4", "--instances", "5", "--domain", "dipped",
        "--seed", "1", "--out-dir", dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.join("domain_dipped.csv")).unwrap();
    assert!(csv.starts_with("m,q,metric,mean,stddev,instances,seed\n"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn bench_qsweep_writes_csv() {
    let dir = scratch("qsweep");
    let out = run(&[
        "bench", "qsweep", "--n", "3", "--m-min", "3", "--m-max", "4", "--instances", "4", "--initial", "egal",
        "--seed", "1", "--out-dir", dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.join("qsweep_egalitarian_envy.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 4 * 3);
}
