//! End-to-end command tests through `cli::run` (in-process, no subshell).

mod common;

use gatekit::aig::write_aiger;
use gatekit::cli::run;
use std::path::PathBuf;

fn args(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn workdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("gatekit_cli_test").join(tag);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).expect("mkdir");
    dir
}

const DUP_AAG: &str = "aag 7 3 0 2 4\n2\n4\n6\n10\n14\n8 2 4\n10 8 6\n12 2 4\n14 12 6\n";

#[test]
fn solve_exit_codes_follow_sat_convention() {
    let dir = workdir("solve");
    let unsat = dir.join("unsat.cnf");
    std::fs::write(&unsat, "p cnf 1 2\n1 0\n-1 0\n").unwrap();
    assert_eq!(run(args(&["solve", unsat.to_str().unwrap()])), 20);
    let sat = dir.join("sat.cnf");
    std::fs::write(&sat, "p cnf 3 2\n1 -2 0\n2 3 0\n").unwrap();
    assert_eq!(run(args(&["solve", sat.to_str().unwrap()])), 10);
}

#[test]
fn solve_aiger_asserted_po() {
    let dir = workdir("solve_aig");
    let path = dir.join("dup.aag");
    std::fs::write(&path, DUP_AAG).unwrap();
    assert_eq!(run(args(&["solve", path.to_str().unwrap()])), 10);
    // AND of three PIs asserted 0 is also satisfiable.
    assert_eq!(
        run(args(&["solve", path.to_str().unwrap(), "--assert-value", "0"])),
        10
    );
}

#[test]
fn sweep_reports_known_duplicate_count() {
    let dir = workdir("sweep");
    let input = dir.join("dup.aag");
    std::fs::write(&input, DUP_AAG).unwrap();
    let output = dir.join("swept.aag");
    let stats = dir.join("stats.json");
    assert_eq!(
        run(args(&[
            "sweep",
            input.to_str().unwrap(),
            "-o",
            output.to_str().unwrap(),
            "--stats",
            stats.to_str().unwrap(),
        ])),
        0
    );
    let stats_json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&stats).unwrap()).unwrap();
    assert_eq!(stats_json["merges"], 2);
    assert_eq!(stats_json["final_and_count"], 2);
    // Resolved config written alongside.
    assert!(dir.join("swept.aag.cfg").exists());
}

#[test]
fn sim_writes_probability_csv() {
    let dir = workdir("sim");
    let input = dir.join("dup.aag");
    std::fs::write(&input, DUP_AAG).unwrap();
    let output = dir.join("probs.csv");
    assert_eq!(
        run(args(&["sim", input.to_str().unwrap(), "-o", output.to_str().unwrap()])),
        0
    );
    let csv = std::fs::read_to_string(&output).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("node,kind,level,prob"));
    // 3 PIs at probability one half under exhaustive patterns.
    assert_eq!(lines.next(), Some("0,pi,0,0.5"));
    assert_eq!(csv.lines().count(), 1 + 7);
}

#[test]
fn dataset_train_eval_roundtrip() {
    let dir = workdir("pipeline");
    let circuits = dir.join("circuits");
    std::fs::create_dir_all(&circuits).unwrap();
    for i in 0..12u64 {
        let aig = common::corpus_circuit(7_000 + i);
        std::fs::write(circuits.join(format!("c{i}.aag")), write_aiger(&aig)).unwrap();
    }
    let corpus = dir.join("corpus.jsonl");
    assert_eq!(
        run(args(&["dataset", circuits.to_str().unwrap(), "-o", corpus.to_str().unwrap()])),
        0
    );
    let ckpt = dir.join("ckpt.json");
    assert_eq!(
        run(args(&[
            "train",
            corpus.to_str().unwrap(),
            "-o",
            ckpt.to_str().unwrap(),
            "--set",
            "epochs_stage1=1",
            "--set",
            "epochs_stage2=1",
            "--set",
            "dim=8",
            "--set",
            "hidden=4",
            "--set",
            "batch=4",
        ])),
        0
    );
    assert!(ckpt.exists());
    assert!(ckpt.with_extension("metrics.csv").exists());
    assert!(ckpt.with_extension("summary.json").exists());
    assert!(dir.join("ckpt.json.cfg").exists());
    let report = dir.join("eval.json");
    let code = run(args(&[
        "eval",
        ckpt.to_str().unwrap(),
        corpus.to_str().unwrap(),
        "-o",
        report.to_str().unwrap(),
    ]));
    // Tiny corpora may lack positive pairs in the eval split; both a clean
    // report (0) and the documented NoPositivePairs failure (2) are
    // legitimate here. Anything else is a bug.
    assert!(code == 0 || code == 2, "eval exit {code}");
    if code == 0 {
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
        assert!(json["pe"].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(args(&["dataset"])), 1); // missing positional
    assert_eq!(run(args(&["train", "x", "--set", "nonsense=1"])), 1);
    assert_eq!(run(args(&["solve", "x", "--bogus-flag", "1"])), 1);
}

#[test]
fn missing_input_is_runtime_error() {
    assert_eq!(run(args(&["sim", "/no/such/file.aag"])), 2);
}
