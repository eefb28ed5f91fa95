use std::path::Path;
use std::process::{Command, Output};

use bbm_cli::parse_flags;
use bbm_core::harness::Kind;

fn bbm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bbm"))
        .args(args)
        .current_dir(dir)
        .env_remove("BBM_SEED")
        .output()
        .expect("binary runs")
}

#[test]
fn crossing_flags_build_the_spec() {
    let inv = parse_flags([
        "bbm",
        "crossing",
        "--y",
        "0.5",
        "--replicates",
        "100",
        "--horizon",
        "20",
        "--dt",
        "0.001",
        "--seed",
        "42",
        "--out",
        "r.jsonl",
    ])
    .unwrap();
    let s = inv.spec;
    assert_eq!(s.kind, Kind::Crossing);
    assert_eq!(s.params.y, vec![0.5]);
    assert_eq!((s.replicates, s.master_seed), (100, 42));
    assert_eq!((s.params.horizon, s.params.dt), (20.0, 0.001));
    assert_eq!(s.output_path, Path::new("r.jsonl"));
}

#[test]
fn lists_accept_commas_and_repeats() {
    let a = parse_flags(["bbm", "crossing", "--y", "0.5,1,1.5"]).unwrap();
    let b = parse_flags(["bbm", "crossing", "--y", "0.5", "--y", "1", "--y", "1.5"]).unwrap();
    assert_eq!(a.spec.params.y, vec![0.5, 1.0, 1.5]);
    assert_eq!(a.spec, b.spec);
}

#[test]
fn bad_invocations_exit_three() {
    let cases: [&[&str]; 6] = [
        &["bbm", "crossing"],
        &["bbm", "crossing", "--y", "0.5", "--dt", "0"],
        &["bbm", "crossing", "--y", "abc"],
        &["bbm", "crossing", "--y", "0.5", "--bogus", "1"],
        &["bbm", "lead", "--s", "0.5", "--prune-gap", "4"],
        &["bbm", "crossing", "--y", "0.5", "--threads", "0"],
    ];
    for argv in cases {
        let err = parse_flags(argv.iter().copied()).unwrap_err();
        assert_eq!(err.code, 3, "{argv:?}");
    }
    let err = parse_flags(["bbm", "crossing", "--y", "0.5", "--dt", "0"]).unwrap_err();
    assert!(err.message.contains("dt"), "{}", err.message);
    let err = parse_flags(["bbm", "crossing", "--y", "abc"]).unwrap_err();
    assert!(err.message.contains("--y"), "{}", err.message);
}

#[test]
fn help_is_not_an_error() {
    assert_eq!(parse_flags(["bbm", "--help"]).unwrap_err().code, 0);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "seed = 7\nreplicates = 12\nhorizon = 5.0\ny = [0.5, 1.0]\nprune_gap = 6.0\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = parse_flags(["bbm", "crossing", "--config", cfg]).unwrap().spec;
    assert_eq!((from_file.master_seed, from_file.replicates), (7, 12));
    assert_eq!(from_file.params.y, vec![0.5, 1.0]);
    assert_eq!(from_file.params.prune_gap, Some(6.0));
    let flagged = parse_flags(["bbm", "crossing", "--config", cfg, "--replicates", "3", "--y", "2"])
        .unwrap()
        .spec;
    assert_eq!((flagged.master_seed, flagged.replicates), (7, 3));
    assert_eq!(flagged.params.y, vec![2.0]);
}

#[test]
fn unknown_config_keys_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "sead = 7\n").unwrap();
    let err = parse_flags(["bbm", "crossing", "--y", "1", "--config", cfg.to_str().unwrap()]).unwrap_err();
    assert_eq!(err.code, 3);
    assert!(err.message.contains("sead"));
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_bbm"));
        cmd.args([
            "simulate",
            "--replicates",
            "1",
            "--horizon",
            "1",
            "--dt",
            "0.5",
            "--out",
            "s.jsonl",
        ])
        .args(extra)
        .current_dir(dir.path())
        .env_remove("BBM_SEED");
        if let Some(v) = env {
            cmd.env("BBM_SEED", v);
        }
        assert!(cmd.status().unwrap().success());
        let line = std::fs::read_to_string(dir.path().join("s.jsonl")).unwrap();
        let rec: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
        rec["seed_used"].as_u64().unwrap()
    };
    let from_env = run(Some("5"), &[]);
    assert_eq!(from_env, run(None, &["--seed", "5"]));
    assert_ne!(from_env, run(None, &[]));
    assert_eq!(run(Some("5"), &["--seed", "9"]), run(None, &["--seed", "9"]));
}

#[test]
fn simulate_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate",
        "--replicates",
        "1",
        "--seed",
        "11",
        "--horizon",
        "3",
        "--dt",
        "0.01",
        "--out",
        "a.jsonl",
    ];
    assert_eq!(bbm(&args, dir.path()).status.code(), Some(0));
    let first = std::fs::read(dir.path().join("a.jsonl")).unwrap();
    assert_eq!(bbm(&args, dir.path()).status.code(), Some(0));
    assert_eq!(first, std::fs::read(dir.path().join("a.jsonl")).unwrap());
    assert!(dir.path().join("a.manifest.json").exists());
}

#[test]
fn budget_exhaustion_exits_two_with_results() {
    let dir = tempfile::tempdir().unwrap();
    let out = bbm(
        &[
            "simulate",
            "--replicates",
            "2",
            "--horizon",
            "8",
            "--dt",
            "0.5",
            "--max-particles",
            "3",
            "--out",
            "b.jsonl",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let text = std::fs::read_to_string(dir.path().join("b.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().all(|l| l.contains("\"truncated\":true")));
}

#[test]
fn invalid_flag_through_binary_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = bbm(&["crossing", "--replicates", "2"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--y"));
}

#[test]
fn crossing_then_fit_with_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = bbm(
        &[
            "crossing",
            "--y",
            "0.5,1.0,1.5",
            "--replicates",
            "40",
            "--horizon",
            "10",
            "--dt",
            "0.01",
            "--prune-gap",
            "6",
            "--seed",
            "3",
            "--out",
            "c.jsonl",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = bbm(
        &["fit", "--input", "c.jsonl", "--csv", "pts.csv", "--out", "fit.jsonl"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("slope") && stdout.contains("95% CI"), "{stdout}");
    let csv = std::fs::read_to_string(dir.path().join("pts.csv")).unwrap();
    assert!(csv.starts_with("observable,scale,"));
    assert_eq!(csv.lines().count(), 4);
    let report: serde_json::Value = serde_json::from_str(
        std::fs::read_to_string(dir.path().join("fit.jsonl"))
            .unwrap()
            .lines()
            .next()
            .unwrap(),
    )
    .unwrap();
    let ci = &report["fit"]["slope_ci95"];
    assert!(ci[0].as_f64().unwrap() <= ci[1].as_f64().unwrap());
}

#[test]
fn validate_prints_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = bbm(&["validate", "--replicates", "2000", "--seed", "1"], dir.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout
            .lines()
            .filter(|l| l.starts_with("PASS") || l.starts_with("FAIL"))
            .count()
            >= 10,
        "{stdout}"
    );
    let all_pass = !stdout.lines().any(|l| l.starts_with("FAIL"));
    assert_eq!(out.status.code(), Some(if all_pass { 0 } else { 1 }));
}
