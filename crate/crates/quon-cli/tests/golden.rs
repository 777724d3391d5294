//! Golden-file and exit-code tests for the command line tool.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_quon")
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("tests/golden")
            .join(name),
    )
    .expect("golden file present")
}

fn run(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs");
    (
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
        out.status.code().unwrap_or(-1),
    )
}

#[test]
fn eval_golden_outputs() {
    for name in ["basics", "duality", "words"] {
        let file = data(&format!("{name}.quon"));
        let (stdout, stderr, code) = run(&["eval", file.to_str().unwrap()]);
        assert_eq!(code, 0, "{name}: {stderr}");
        assert_eq!(stdout, golden(&format!("{name}.eval.txt")), "{name}");
    }
}

#[test]
fn normalize_golden_output() {
    let file = data("basics.quon");
    let (stdout, _, code) = run(&["normalize", file.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(stdout, golden("basics.normalize.txt"));
}

#[test]
fn pf_demo_golden_output() {
    let (stdout, _, code) = run(&["pf", "--dim", "3"]);
    assert_eq!(code, 0);
    assert_eq!(stdout, golden("pf.d3.txt"));
}

#[test]
fn clifford_prints_census() {
    let (stdout, _, code) = run(&["clifford", "--dim", "3", "--cap", "100000"]);
    assert_eq!(code, 0);
    assert_eq!(stdout.trim(), "216");
    let (stdout2, _, code2) = run(&["clifford", "--dim", "2"]);
    assert_eq!(code2, 0);
    assert_eq!(stdout2.trim(), "24");
}

#[test]
fn exit_codes() {
    // failing check -> 1
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.quon");
    std::fs::write(&bad, "dim 2\ncheck Z == X\n").unwrap();
    let (_, _, code) = run(&["eval", bad.to_str().unwrap()]);
    assert_eq!(code, 1);

    // parse error -> 2
    let broken = dir.path().join("broken.quon");
    std::fs::write(&broken, "dim 2\nlet = nothing\n").unwrap();
    let (_, stderr, code) = run(&["eval", broken.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stderr.contains("line 2"), "stderr was: {stderr}");

    // unknown flag -> 2 (usage error from the argument parser)
    let (_, _, code) = run(&["eval", "--definitely-not-a-flag"]);
    assert_eq!(code, 2);

    // passing document -> 0
    let good = dir.path().join("good.quon");
    std::fs::write(&good, "dim 2\ncheck Z == Z\n").unwrap();
    let (_, _, code) = run(&["eval", good.to_str().unwrap()]);
    assert_eq!(code, 0);
}

#[test]
fn teleport_reports_unit_fidelity() {
    let (stdout, _, code) = run(&[
        "teleport", "--dim", "3", "--trials", "3", "--seed", "42",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("worst fidelity"));
    assert!(stdout.contains("correction X^"));
}

#[test]
fn search_finds_words_and_fails_cleanly() {
    let (stdout, _, code) = run(&["search", "--dim", "4", "--target", "G", "--max-len", "2"]);
    assert_eq!(code, 0);
    assert_eq!(stdout.trim(), "found: b1");
    let (stdout2, _, code2) = run(&["search", "--dim", "2", "--target", "X", "--max-len", "0"]);
    assert_eq!(code2, 1);
    assert!(stdout2.contains("not found"));
}

#[test]
fn report_json_is_deterministic_apart_from_runtime() {
    let dir = tempfile::tempdir().unwrap();
    let r1 = dir.path().join("r1.json");
    let r2 = dir.path().join("r2.json");
    for r in [&r1, &r2] {
        let (_, stderr, code) = run(&[
            "check",
            "--dims",
            "2",
            "--seed",
            "7",
            "--trials",
            "3",
            "--contexts",
            "5",
            "--report",
            r.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{stderr}");
    }
    let scrub = |path: &Path| -> String {
        let text = std::fs::read_to_string(path).unwrap();
        text.lines()
            .filter(|l| !l.trim_start().starts_with("\"runtime_ms\""))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let a = scrub(&r1);
    let b = scrub(&r2);
    assert_eq!(a, b);
    assert!(a.contains("\"schema\": 1"));
    assert!(a.contains("\"pass\": true"));
}

#[test]
fn config_file_merges_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("quon.conf");
    std::fs::write(&cfg, "dims = 2\ntol = 1e-9\nseed = 11\n").unwrap();
    let report = dir.path().join("report.json");
    let (_, stderr, code) = run(&[
        "check",
        "--config",
        cfg.to_str().unwrap(),
        "--trials",
        "2",
        "--contexts",
        "3",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{stderr}");
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("\"seed\": 11"));
    assert!(text.contains("\"dims\": [\n    2\n  ]"), "{text}");
}

#[test]
fn roundtrip_of_shipped_corpus() {
    for name in ["basics.quon", "duality.quon", "words.quon"] {
        let text = std::fs::read_to_string(data(name)).unwrap();
        let doc = quon_cli::dsl::parse(&text).unwrap();
        let rendered = quon_cli::dsl::render(&doc);
        let doc2 = quon_cli::dsl::parse(&rendered).unwrap();
        assert_eq!(doc, doc2, "{name}");
    }
}
