use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn instance(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(name)
}

fn sag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sag"))
        .args(args)
        .env_remove("SAG_MAX_SCENARIOS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid json")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_small_edf_is_schedulable() {
    let o = sag(&["analyze", path(&instance("small_edf.txt")), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["schedulable"], true);
    assert_eq!(v["witness"], Value::Null);
    let last = v["bounds"]
        .as_array()
        .unwrap()
        .iter()
        .find(|b| b["task"] == 2 && b["job"] == 2)
        .unwrap();
    assert_eq!((last["eft_min"].as_u64(), last["lft_max"].as_u64()), (Some(6), Some(8)));
}

#[test]
fn analyze_sequential_matches_parallel() {
    let file = instance("anomaly.txt");
    let a = sag(&["analyze", path(&file), "--format", "json", "--exhaustive-misses"]);
    let b = sag(&[
        "analyze",
        path(&file),
        "--format",
        "json",
        "--exhaustive-misses",
        "--sequential",
    ]);
    assert_eq!(a.status.code(), Some(1));
    let strip = |mut v: Value| {
        v["stats"]["wall_ms"] = Value::Null;
        v
    };
    assert_eq!(strip(json(&a)), strip(json(&b)));
}

#[test]
fn single_eligibility_reports_a_false_miss() {
    let o = sag(&[
        "analyze",
        path(&instance("se_false_alarm.txt")),
        "--policy",
        "p-fp-edf",
        "--mode",
        "se",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let w = &json(&o)["witness"];
    assert_eq!((w["task"].as_u64(), w["job"].as_u64()), (Some(3), Some(1)));
    assert_eq!((w["lft"].as_u64(), w["deadline"].as_u64()), (Some(18), Some(14)));

    let text = sag(&[
        "analyze",
        path(&instance("se_false_alarm.txt")),
        "--policy",
        "p-fp-edf",
        "--mode",
        "se",
    ]);
    assert!(stdout(&text).contains("J3,1 may finish at 18 > deadline 14"));
}

#[test]
fn missing_file_is_a_usage_error() {
    let o = sag(&["analyze", "/nonexistent/instance.txt"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot read"));
}

#[test]
fn malformed_instance_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.txt");
    std::fs::write(&file, "task 1 T=0 rmin=0 rmax=0 cmin=1 cmax=1 d=1\n").unwrap();
    assert_eq!(sag(&["analyze", path(&file)]).status.code(), Some(2));
    assert_eq!(sag(&["analyze", path(&file), "--policy", "rr"]).status.code(), Some(2));
}

#[test]
fn compare_shows_the_se_false_alarm() {
    let o = sag(&[
        "compare",
        path(&instance("se_false_alarm.txt")),
        "--policy",
        "p-fp-edf",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["me"], "schedulable");
    assert_eq!(v["se"], "unschedulable");
    assert_eq!(v["oracle"], "schedulable");
    assert_eq!(v["consistent"], true);
}

#[test]
fn compare_agrees_with_the_oracle() {
    for (name, verdict) in [("anomaly.txt", "unschedulable"), ("small_edf.txt", "schedulable")] {
        for policy in ["edf", "fp-edf", "p-fp-edf", "cp", "cw"] {
            let o = sag(&["compare", path(&instance(name)), "--policy", policy, "--format", "json"]);
            assert_eq!(o.status.code(), Some(0), "{name} {policy}");
            let v = json(&o);
            assert_eq!(v["me"], v["oracle"], "{name} {policy}");
            if policy == "edf" {
                assert_eq!(v["me"], verdict);
            }
        }
    }
}

#[test]
fn compare_single_task() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("one.txt");
    std::fs::write(&file, "task 1 T=10 rmin=0 rmax=2 cmin=1 cmax=3 d=5\n").unwrap();
    let o = sag(&["compare", path(&file)]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("me       schedulable"));
    assert!(text.contains("oracle   schedulable"));
}

#[test]
fn oracle_cap_skips_enumeration() {
    let file = instance("anomaly.txt");
    let o = Command::new(env!("CARGO_BIN_EXE_sag"))
        .args(["compare", path(&file), "--format", "json"])
        .env("SAG_MAX_SCENARIOS", "10")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["oracle"], "skipped");

    let o = sag(&["brute-force", path(&file), "--max-scenarios", "10"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn brute_force_finds_the_anomaly_miss() {
    let o = sag(&["brute-force", path(&instance("anomaly.txt")), "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["schedulable"], false);
    assert_eq!(v["total_scenarios"], "108");
    let checked: u64 = v["scenarios_checked"].as_str().unwrap().parse().unwrap();
    let index: u64 = v["failing"]["index"].as_str().unwrap().parse().unwrap();
    assert_eq!(checked, index + 1);

    let all = json(&sag(&[
        "brute-force",
        path(&instance("anomaly.txt")),
        "--all",
        "--format",
        "json",
    ]));
    assert_eq!(all["scenarios_checked"], "108");
}

#[test]
fn simulate_worst_case_and_scenario_file() {
    let file = instance("anomaly.txt");
    let o = sag(&["simulate", path(&file), "--worst-case", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["misses"], 0);

    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.txt");
    std::fs::write(
        &scenario,
        "J 1 1 r=2 c=7\nJ 2 1 r=1 c=2\nJ 2 2 r=11 c=4\nJ 3 1 r=0 c=1\nJ 3 2 r=5 c=1\nJ 3 3 r=10 c=1\nJ 3 4 r=15 c=1\n",
    )
    .unwrap();
    let o = sag(&[
        "simulate",
        path(&file),
        "--scenario",
        path(&scenario),
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    let missed: Vec<String> = v["dispatches"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|d| d["missed"] == true)
        .map(|d| format!("J{},{}", d["task"], d["job"]))
        .collect();
    assert!(missed.contains(&"J3,2".to_string()), "{missed:?}");

    assert_eq!(sag(&["simulate", path(&file)]).status.code(), Some(2));
}

#[test]
fn gen_is_deterministic() {
    let args = [
        "gen", "--tasks", "6", "--util", "0.6", "--rj", "0.2", "--rc", "0.5", "--seed", "11",
    ];
    let a = sag(&args);
    let b = sag(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().filter(|l| l.starts_with("task ")).count(), 6);

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("gen.txt");
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path(&file)]);
    let o = sag(&with_out);
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read(&file).unwrap(), a.stdout);
    assert!(sag(&["analyze", path(&file)]).status.code().unwrap() <= 1);
}

#[test]
fn gen_rejects_bad_parameters() {
    assert_eq!(sag(&["gen", "--tasks", "0", "--util", "0.5"]).status.code(), Some(2));
    assert_eq!(sag(&["gen", "--tasks", "3", "--util", "1.5"]).status.code(), Some(2));
    assert_eq!(
        sag(&["gen", "--tasks", "20", "--util", "0.3", "--periods", "2"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn export_dot_writes_the_graph() {
    let o = sag(&["export-dot", path(&instance("small_edf.txt"))]);
    assert_eq!(o.status.code(), Some(0));
    let dot = stdout(&o);
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches(" -> ").count(), 8);

    let o = sag(&[
        "export-dot",
        path(&instance("se_false_alarm.txt")),
        "--policy",
        "p-fp-edf",
        "--mode",
        "se",
    ]);
    assert!(stdout(&o).contains("color=red"));
}

#[test]
fn bench_empty_spec_prints_only_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, "").unwrap();
    let o = sag(&["bench", path(&spec)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), format!("{}\n", sag_cli::bench::CSV_HEADER));
}

#[test]
fn bench_prints_one_row_per_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{"repetitions": 1, "entries": [
            {"tasks": 4, "utilization": 0.4, "rj": 0.2, "rc": 0.2,
             "seeds": [1,2,3,4,5,6,7,8,9,10]}
        ]}"#,
    )
    .unwrap();
    let o = sag(&["bench", path(&spec), "--jobs", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 10);
    for (i, row) in rows.iter().enumerate() {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 8);
        assert!(cols[0].ends_with(&format!("-s{}", i + 1)), "{row}");
        assert_eq!((cols[2], cols[3]), ("edf", "me"));
    }

    std::fs::write(
        &spec,
        r#"{"repetitions": 1, "entries": [
            {"tasks": 3, "utilization": 0.3, "rj": 0.1, "rc": 0.1,
             "seeds": [1, 2], "modes": ["me", "se"]}
        ]}"#,
    )
    .unwrap();
    let text = stdout(&sag(&["bench", path(&spec)]));
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].contains(",me,") && rows[1].contains(",se,"));
}

#[test]
fn bench_rejects_unknown_fields() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, r#"{"entries": [], "reps": 2}"#).unwrap();
    assert_eq!(sag(&["bench", path(&spec)]).status.code(), Some(2));
}
