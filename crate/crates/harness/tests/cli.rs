//! End-to-end checks of the `atsp` binary: exit codes, CSV determinism,
//! and the gen → lp → solve → verify pipeline on temp files.

use std::path::PathBuf;
use std::process::{Command, Output};

fn atsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_atsp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("atsp-cli-test-{}-{}", std::process::id(), name));
    p
}

#[test]
fn gen_solve_opt_pipeline() {
    let file = tmp("pipeline.json");
    let out = atsp(&[
        "gen",
        "--n",
        "7",
        "--prob",
        "1/4",
        "--seed",
        "9",
        "--out",
        file.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let out = atsp(&["solve", "--in", file.to_str().unwrap()]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("certified bound:"));
    assert!(stdout.contains("[certified] tour structure"));

    let out = atsp(&["opt", "--in", file.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("exact optimum: 7"));

    let out = atsp(&["lp", "--in", file.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("LP value: 7"));
    std::fs::remove_file(&file).ok();
}

#[test]
fn bench_csv_is_reproducible() {
    let run_once = || {
        let out = atsp(&[
            "bench", "--n-min", "4", "--n-max", "6", "--seeds", "2", "--probs", "1/5",
        ]);
        assert!(out.status.success());
        String::from_utf8_lossy(&out.stdout).to_string()
    };
    let a = run_once();
    let b = run_once();
    assert_eq!(a, b);
    assert!(a.starts_with("n,seed,prob,lp,alg_cost,opt,ratio_alg_lp,restarts\n"));
    // every row's ratio column is at least 1
    for line in a.lines().skip(1) {
        let ratio = line.split(',').nth(6).unwrap();
        assert!(!ratio.starts_with('0'), "ratio below one in {}", line);
    }
}

#[test]
fn verify_rejects_bad_cover() {
    let file = tmp("verify.json");
    let out = atsp(&[
        "gen",
        "--n",
        "4",
        "--prob",
        "0/1",
        "--seed",
        "1",
        "--out",
        file.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let good = tmp("cover-good.json");
    std::fs::write(&good, r#"{"h": [], "f": [[0,1],[1,1],[2,1],[3,1]]}"#).unwrap();
    let out = atsp(&[
        "verify",
        "--in",
        file.to_str().unwrap(),
        "--cover",
        good.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let bad = tmp("cover-bad.json");
    std::fs::write(&bad, r#"{"h": [], "f": []}"#).unwrap();
    let out = atsp(&[
        "verify",
        "--in",
        file.to_str().unwrap(),
        "--cover",
        bad.to_str().unwrap(),
    ]);
    assert!(!out.status.success(), "empty cover must fail verification");
    std::fs::remove_file(&file).ok();
    std::fs::remove_file(&good).ok();
    std::fs::remove_file(&bad).ok();
}
