mod common;

use std::path::Path;
use std::process::{Command, Output};

use star_forge::architecture::{parse_design, ControlSchedule};
use star_forge::schedule::parse_schedule;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_star-forge"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn with_fixture() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.json"), common::SIX_TOKEN).unwrap();
    dir
}

#[test]
fn synth_six_token() {
    let dir = with_fixture();
    let o = run(
        dir.path(),
        &[
            "synth",
            "s.json",
            "--out",
            "o",
            "--emit",
            "json,dot,rtl,csv",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("verified ok"));
    assert!(out.contains("n=6 slots=5 saved=1 ctrl=2 max_live=5"));
    for f in [
        "netlist.json",
        "control.json",
        "report.json",
        "design.json",
        "architecture.dot",
        "rcg.dot",
        "design.vhd.txt",
        "occupancy.csv",
    ] {
        assert!(dir.path().join("o").join(f).is_file(), "{f}");
    }
    let design =
        parse_design(&std::fs::read_to_string(dir.path().join("o/design.json")).unwrap()).unwrap();
    assert_eq!(design.netlist.elements.len(), 2);
    let csv = std::fs::read_to_string(dir.path().join("o/occupancy.csv")).unwrap();
    assert!(csv.starts_with("cycle,element,count\n"));
}

#[test]
fn knobs_override_defaults() {
    let dir = with_fixture();
    let o = run(
        dir.path(),
        &["synth", "s.json", "--out", "o", "--no-fifo", "--no-lifo"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(
        stdout(&o).contains("slots=5 saved=1 ctrl=5"),
        "{}",
        stdout(&o)
    );
    std::fs::write(dir.path().join("strict.toml"), "min_fifo_len = 7\n").unwrap();
    let o = run(
        dir.path(),
        &["--config", "strict.toml", "synth", "s.json", "--out", "o2"],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).contains("ctrl=2 "), "{}", stdout(&o));
}

#[test]
fn generator_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["gen", "block", "--rows", "3", "--cols", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let s = parse_schedule(&stdout(&o)).unwrap();
    assert_eq!(s.len(), 12);
    assert!(stderr(&o).contains("tokens=12"));
    let o = run(dir.path(), &["gen", "linear", "--n", "4", "--offset", "2"]);
    assert_eq!(o.status.code(), Some(1), "offset below n is infeasible");
}

#[test]
fn input_errors_exit_1() {
    let dir = with_fixture();
    std::fs::write(dir.path().join("bad.json"), "{\"ports\":").unwrap();
    let o = run(dir.path(), &["synth", "bad.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line"));

    let o = run(dir.path(), &["synth", "missing.json"]);
    assert_eq!(o.status.code(), Some(1));

    std::fs::write(dir.path().join("c.toml"), "bogus = 1\n").unwrap();
    let o = run(dir.path(), &["--config", "c.toml", "synth", "s.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bogus"));

    let o = run(dir.path(), &["synth", "s.json", "--fill", "1.5"]);
    assert_eq!(o.status.code(), Some(1));

    let o = run(dir.path(), &["synth", "s.json", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(1));

    let invalid = common::SIX_TOKEN.replace("\"cycle\": 4", "\"cycle\": 0");
    assert_ne!(invalid, common::SIX_TOKEN);
    std::fs::write(dir.path().join("invalid.json"), invalid).unwrap();
    let o = run(dir.path(), &["synth", "invalid.json"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));

    assert_eq!(run(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn simulate_detects_tampering() {
    let dir = with_fixture();
    assert!(run(dir.path(), &["synth", "s.json", "--out", "o"])
        .status
        .success());
    let o = run(
        dir.path(),
        &["simulate", "o/netlist.json", "o/control.json", "s.json"],
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "ok cycles=12");

    let path = dir.path().join("o/control.json");
    let mut control: ControlSchedule =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let ops = &mut control.steps[9].ops;
    let pop = ops.iter().position(|op| op.token == "b").unwrap();
    let op = ops.remove(pop);
    control.steps[6].ops.insert(0, op);
    std::fs::write(
        dir.path().join("bad.json"),
        serde_json::to_string(&control).unwrap(),
    )
    .unwrap();
    let o = run(
        dir.path(),
        &["simulate", "o/netlist.json", "bad.json", "s.json"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("mismatch"));
}

#[test]
fn report_compares_configs() {
    let dir = with_fixture();
    std::fs::write(
        dir.path().join("none.toml"),
        "name = \"none\"\nenable_fifo = false\nenable_lifo = false\n",
    )
    .unwrap();
    std::fs::write(dir.path().join("defaults.toml"), "name = \"defaults\"\n").unwrap();
    let o = run(
        dir.path(),
        &[
            "report",
            "s.json",
            "defaults.toml",
            "none.toml",
            "--out",
            "r",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = stdout(&o);
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(
        lines[0],
        "| config | slots | saved | ctrl | cost | max_live |"
    );
    assert_eq!(lines.len(), 4);
    assert!(lines[2].starts_with("| defaults | 5 | 1 | 2 |"));
    assert!(lines[3].starts_with("| none | 5 | 1 | 5 |"));
    assert!(dir.path().join("r/report.md").is_file());
    assert!(dir.path().join("r/report.csv").is_file());
}

#[test]
fn dot_lists_every_edge() {
    let dir = with_fixture();
    let o = run(dir.path(), &["dot", "s.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).matches("->").count(), 15);
}

#[test]
fn seeded_generation_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let a = run(dir.path(), &["gen", "random", "--n", "12", "--seed", "3"]);
    let b = run(dir.path(), &["gen", "random", "--n", "12", "--seed", "3"]);
    let c = run(dir.path(), &["gen", "random", "--n", "12", "--seed", "4"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}
