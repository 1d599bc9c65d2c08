//! End-to-end tests of the `intergroup-lens` binary.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_intergroup-lens"))
}

fn run_ok(args: &[&str]) {
    let output = bin().args(args).output().expect("binary runs");
    assert!(
        output.status.success(),
        "command {:?} failed:\n{}",
        args,
        String::from_utf8_lossy(&output.stderr)
    );
}

fn path(p: &Path) -> String {
    p.display().to_string()
}

/// The documented quickstart: synth through analyze, all stages produce
/// their files.
#[test]
fn quickstart_pipeline_produces_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let w = tmp.path();
    run_ok(&["synth", "--n", "500", "--seed", "5", "--out", &path(w)]);
    for name in [
        "members.tsv",
        "tweets.jsonl",
        "annotations.jsonl",
        "gold.jsonl",
    ] {
        assert!(w.join(name).exists(), "{name} missing");
    }
    run_ok(&[
        "ingest",
        "--tweets",
        &path(&w.join("tweets.jsonl")),
        "--members",
        &path(&w.join("members.tsv")),
        "--out",
        &path(&w.join("utterances.jsonl")),
        "--seed",
        "5",
    ]);
    run_ok(&[
        "aggregate",
        "--annotations",
        &path(&w.join("annotations.jsonl")),
        "--utterances",
        &path(&w.join("utterances.jsonl")),
        "--out",
        &path(&w.join("splits")),
        "--seed",
        "5",
    ]);
    for name in ["train.jsonl", "dev.jsonl", "test.jsonl", "counts.json"] {
        assert!(w.join("splits").join(name).exists(), "{name} missing");
    }
    run_ok(&[
        "agreement",
        "--annotations",
        &path(&w.join("annotations.jsonl")),
        "--mode",
        "all",
        "--out",
        &path(&w.join("agreement.json")),
    ]);
    let agreement: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(w.join("agreement.json")).unwrap()).unwrap();
    let pea_max = agreement["pea_max"].as_f64().unwrap();
    let pea_min = agreement["pea_min"].as_f64().unwrap();
    assert!(pea_min <= pea_max);

    run_ok(&[
        "train",
        "--task",
        "igr",
        "--model",
        "nbsvm",
        "--train",
        &path(&w.join("splits/train.jsonl")),
        "--dev",
        &path(&w.join("splits/dev.jsonl")),
        "--seed",
        "5",
        "--out",
        &path(&w.join("nbsvm.json")),
    ]);
    run_ok(&[
        "train",
        "--task",
        "joint",
        "--model",
        "mlp",
        "--train",
        &path(&w.join("splits/train.jsonl")),
        "--dev",
        &path(&w.join("splits/dev.jsonl")),
        "--seed",
        "5",
        "--hidden-dim",
        "32",
        "--restarts",
        "2",
        "--out",
        &path(&w.join("mlp.json")),
    ]);
    run_ok(&[
        "evaluate",
        "--model",
        &path(&w.join("mlp.json")),
        "--test",
        &path(&w.join("splits/test.jsonl")),
        "--compare",
        &path(&w.join("nbsvm.json")),
        "--bootstrap",
        "1000",
        "--seed",
        "5",
        "--out",
        &path(&w.join("eval.json")),
    ]);
    let eval: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(w.join("eval.json")).unwrap()).unwrap();
    assert!(eval["igr"]["macro_f1"]["mean"].as_f64().unwrap() > 0.0);
    assert!(eval["emotion"]["macro_f1"]["mean"].as_f64().unwrap() > 0.0);
    assert_eq!(eval["comparisons"].as_array().unwrap().len(), 1);

    run_ok(&[
        "analyze",
        "--data",
        &path(&w.join("gold.jsonl")),
        "--model",
        &path(&w.join("nbsvm.json")),
        "--topk",
        "3",
        "--out",
        &path(&w.join("reports")),
    ]);
    for name in [
        "report.json",
        "report.md",
        "distribution.csv",
        "cooccurrence.csv",
    ] {
        assert!(w.join("reports").join(name).exists(), "{name} missing");
    }
}

/// Re-running a stage with identical inputs and seeds overwrites its outputs
/// with identical bytes.
#[test]
fn stages_are_idempotent() {
    let tmp = tempfile::tempdir().unwrap();
    let w = tmp.path();
    run_ok(&["synth", "--n", "200", "--seed", "9", "--out", &path(w)]);
    let first = std::fs::read(w.join("tweets.jsonl")).unwrap();
    run_ok(&["synth", "--n", "200", "--seed", "9", "--out", &path(w)]);
    let second = std::fs::read(w.join("tweets.jsonl")).unwrap();
    assert_eq!(first, second);

    run_ok(&[
        "agreement",
        "--annotations",
        &path(&w.join("annotations.jsonl")),
        "--mode",
        "best",
        "--out",
        &path(&w.join("agreement.json")),
    ]);
    let first = std::fs::read(w.join("agreement.json")).unwrap();
    run_ok(&[
        "agreement",
        "--annotations",
        &path(&w.join("annotations.jsonl")),
        "--mode",
        "best",
        "--out",
        &path(&w.join("agreement.json")),
    ]);
    assert_eq!(first, std::fs::read(w.join("agreement.json")).unwrap());
}

#[test]
fn exit_codes_distinguish_validation_from_io() {
    let tmp = tempfile::tempdir().unwrap();
    let w = tmp.path();

    // Missing input file: I/O error, exit 2.
    let output = bin()
        .args([
            "ingest",
            "--tweets",
            &path(&w.join("missing.jsonl")),
            "--members",
            &path(&w.join("missing.tsv")),
            "--out",
            &path(&w.join("out.jsonl")),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));

    // Validation error: exit 1.
    std::fs::write(w.join("members.tsv"), "alice\tIndependent\t2010\t2021\n").unwrap();
    std::fs::write(w.join("tweets.jsonl"), "").unwrap();
    let output = bin()
        .args([
            "ingest",
            "--tweets",
            &path(&w.join("tweets.jsonl")),
            "--members",
            &path(&w.join("members.tsv")),
            "--out",
            &path(&w.join("out.jsonl")),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("members.tsv:1"), "stderr was: {stderr}");

    // Unknown flag: exit 1 with the flag named.
    let output = bin().args(["synth", "--frobnicate"]).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("--frobnicate"));

    // Help: exit 0.
    let output = bin().args(["--help"]).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let tmp = tempfile::tempdir().unwrap();
    let w = tmp.path();
    let cfg = w.join("lens.cfg");
    std::fs::write(&cfg, "seed = 21\nn = 120\nnoise_rate = 0.0\n").unwrap();

    // n comes from the config file.
    let out_a = w.join("a");
    run_ok(&["synth", "--config", &path(&cfg), "--out", &path(&out_a)]);
    let lines = std::fs::read_to_string(out_a.join("tweets.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 120);

    // A flag overrides the config file.
    let out_b = w.join("b");
    run_ok(&[
        "synth",
        "--config",
        &path(&cfg),
        "--n",
        "60",
        "--out",
        &path(&out_b),
    ]);
    let lines = std::fs::read_to_string(out_b.join("tweets.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 60);

    // Unknown config keys are rejected.
    std::fs::write(&cfg, "nonsense = 1\n").unwrap();
    let output = bin()
        .args([
            "synth",
            "--config",
            &path(&cfg),
            "--out",
            &path(&w.join("c")),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("nonsense"));
}

#[test]
fn jobs_flag_controls_the_worker_pool() {
    let tmp = tempfile::tempdir().unwrap();
    let w = tmp.path();
    run_ok(&[
        "synth",
        "--n",
        "120",
        "--seed",
        "2",
        "--jobs",
        "2",
        "--out",
        &path(w),
    ]);
    assert!(w.join("tweets.jsonl").exists());
    let output = bin()
        .args([
            "synth",
            "--n",
            "120",
            "--jobs",
            "0",
            "--out",
            &path(&w.join("x")),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn balanced_ingest_honors_per_year() {
    let tmp = tempfile::tempdir().unwrap();
    let w = tmp.path();
    run_ok(&["synth", "--n", "600", "--seed", "4", "--out", &path(w)]);
    run_ok(&[
        "ingest",
        "--tweets",
        &path(&w.join("tweets.jsonl")),
        "--members",
        &path(&w.join("members.tsv")),
        "--out",
        &path(&w.join("balanced.jsonl")),
        "--per-year",
        "20",
        "--seed",
        "4",
    ]);
    let content = std::fs::read_to_string(w.join("balanced.jsonl")).unwrap();
    let utterances: Vec<serde_json::Value> = content
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    // 12 years, up to 10 per class per year.
    assert!(utterances.len() <= 240);
    let mut by_year: std::collections::BTreeMap<(i64, &str), usize> =
        std::collections::BTreeMap::new();
    for u in &utterances {
        let year = u["year"].as_i64().unwrap();
        let igr = u["igr"].as_str().unwrap();
        *by_year.entry((year, igr)).or_default() += 1;
    }
    for (year, _) in by_year.keys() {
        let ins = by_year.get(&(*year, "in_group")).copied().unwrap_or(0);
        let outs = by_year.get(&(*year, "out_group")).copied().unwrap_or(0);
        assert_eq!(ins, outs, "year {year} unbalanced");
    }
}
