use std::process::{Command, Output};

use serde_json::Value;

fn ghz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ghz-comm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn without_timing(s: &str) -> String {
    s.lines()
        .filter(|l| !l.starts_with("{\"timing\"") && !l.starts_with("time "))
        .collect::<Vec<_>>()
        .join("\n")
}

fn machine_lines(o: &Output) -> Vec<Value> {
    stdout(o).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn demo_exit_zero_at_length_extremes() {
    for n in ["1", "3", "32"] {
        let o = ghz(&["demo", "--n", n, "--seed", "11", "--format", "machine"]);
        assert_eq!(o.status.code(), Some(0), "n={n}");
        let lines = machine_lines(&o);
        assert_eq!(lines[0]["schema"], "ghz-comm-report/1");
        assert_eq!(lines[0]["params"]["seed"], 11);
        assert!(lines.iter().any(|l| l["summary"]["pass"] == true));
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(ghz(&["demo", "--n", "0"]).status.code(), Some(2));
    assert_eq!(ghz(&["demo", "--n", "33"]).status.code(), Some(2));
    assert_eq!(ghz(&["search", "--workers", "0"]).status.code(), Some(2));
    assert_eq!(ghz(&["search", "--scope", "nope"]).status.code(), Some(2));
    assert_eq!(ghz(&["replay", "--scope", "3.1"]).status.code(), Some(2));
    assert_eq!(ghz(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(ghz(&[]).status.code(), Some(2));
}

#[test]
fn reports_identical_apart_from_timing() {
    for args in [
        &["demo", "--n", "9", "--seed", "5", "--format", "machine"][..],
        &["verify", "--n", "4", "--seed", "5", "--format", "machine"][..],
        &["verify", "--n", "3", "--scope", "quantum"][..],
        &["replay", "--format", "machine"][..],
    ] {
        let a = stdout(&ghz(args));
        let b = stdout(&ghz(args));
        assert_eq!(without_timing(&a), without_timing(&b), "{args:?}");
    }
}

#[test]
fn seed_changes_demo_input() {
    let a = stdout(&ghz(&["demo", "--n", "16", "--seed", "1"]));
    let b = stdout(&ghz(&["demo", "--n", "16", "--seed", "2"]));
    assert_ne!(without_timing(&a), without_timing(&b));
}

#[test]
fn every_report_carries_the_seed() {
    for args in [
        &["demo", "--seed", "42"][..],
        &["verify", "--scope", "lemma1", "--seed", "42"][..],
        &["search", "--scope", "ip3", "--seed", "42"][..],
        &["replay", "--scope", "1", "--seed", "42"][..],
    ] {
        let mut full = args.to_vec();
        full.extend(["--format", "machine"]);
        let o = ghz(&full);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        assert_eq!(machine_lines(&o)[0]["params"]["seed"], 42, "{args:?}");
    }
}

#[test]
fn verify_scopes_pass() {
    let o = ghz(&["verify", "--scope", "lemma1", "--format", "machine"]);
    assert_eq!(o.status.code(), Some(0));
    let lines = machine_lines(&o);
    let checks: Vec<&Value> = lines.iter().filter(|l| l.get("check").is_some()).collect();
    assert_eq!(checks.len(), 4);
    assert_eq!(checks[3]["check"], "lemma1/111");
    assert_eq!(checks[3]["details"]["parity"], 1);

    let o = ghz(&["verify", "--scope", "cases"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("[PASS] case/2.2.2"));
    assert!(text.contains("[PASS] case-cover"));
    assert!(!text.contains("[FAIL]"));
}

#[test]
fn search_worker_count_does_not_change_results() {
    let one = stdout(&ghz(&["search", "--scope", "blackboard", "--workers", "1", "--format", "machine"]));
    let eight = stdout(&ghz(&["search", "--scope", "blackboard", "--workers", "8", "--format", "machine"]));
    let strip = |s: &str| {
        without_timing(s)
            .lines()
            .skip(1)
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&one), strip(&eight));
    assert!(one.contains("\"examined\":452984832"));
}

#[test]
fn search_ip3_finds_nothing() {
    let o = ghz(&["search", "--scope", "ip3", "--format", "machine"]);
    assert_eq!(o.status.code(), Some(0));
    let lines = machine_lines(&o);
    assert_eq!(lines[1]["details"]["feasible"], 0);
    assert_eq!(lines[2]["check"], "ip3-three-bit");
    assert_eq!(lines[2]["pass"], true);
}

#[test]
fn out_writes_file_instead_of_stdout() {
    let dir = std::env::temp_dir().join(format!("ghz-comm-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.jsonl");
    let o = ghz(&["replay", "--scope", "2.1.1", "--format", "machine", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.starts_with("{\"command\":\"replay\""));
    std::fs::remove_dir_all(&dir).unwrap();
}
