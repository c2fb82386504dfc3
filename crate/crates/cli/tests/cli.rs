use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_polar-comb"));
    c.env_remove("POLAR_JOBS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn polar-comb")
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn polar-comb");
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn construct(dir: &Path, n: usize, k: usize) -> String {
    let path = dir.join(format!("mask_{n}_{k}.txt"));
    let p = path.to_str().unwrap().to_string();
    stdout(&run(&[
        "construct",
        "--n",
        &n.to_string(),
        "--k",
        &k.to_string(),
        "--out",
        &p,
    ]));
    p
}

#[test]
fn construct_writes_mask() {
    let dir = tempfile::tempdir().unwrap();
    let p = construct(dir.path(), 8, 4);
    assert_eq!(std::fs::read_to_string(&p).unwrap(), "8\n0 0 0 1 0 1 1 1\n");

    let out = stdout(&run(&["construct", "--n", "2", "--k", "0"]));
    assert_eq!(out, "2\n0 0\n");

    let p = construct(dir.path(), 1024, 512);
    let text = std::fs::read_to_string(p).unwrap();
    let ones = text
        .lines()
        .nth(1)
        .unwrap()
        .split_whitespace()
        .filter(|t| *t == "1")
        .count();
    assert_eq!(ones, 512);
}

#[test]
fn construct_rejects_bad_sizes() {
    assert!(!run(&["construct", "--n", "6", "--k", "2"]).status.success());
    assert!(!run(&["construct", "--n", "8", "--k", "9"]).status.success());
}

#[test]
fn encode_decode_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let mask = construct(dir.path(), 16, 8);
    let data = "1 0 1 1 0 0 1 0\n0 1 1 1 1 0 0 1\n";
    let llrs = stdout(&run_stdin(&["encode", "--mask", &mask, "--llr", "6"], data));
    assert_eq!(llrs.lines().count(), 2);
    for args in [
        vec![],
        vec!["--qbits", "5"],
        vec!["--exact"],
        vec!["--plain"],
    ] {
        let mut full = vec!["decode", "--mask", mask.as_str()];
        full.extend(args);
        let decoded = stdout(&run_stdin(&full, &llrs));
        assert_eq!(decoded, data);
    }
}

#[test]
fn encode_emits_codeword_bits() {
    let dir = tempfile::tempdir().unwrap();
    let mask = construct(dir.path(), 8, 4);
    let out = stdout(&run_stdin(&["encode", "--mask", &mask], "0 0 0 0\n"));
    assert_eq!(out, "0 0 0 0 0 0 0 0\n");
    let bad = run_stdin(&["encode", "--mask", &mask], "0 1\n");
    assert!(!bad.status.success());
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mask = construct(dir.path(), 64, 32);
    let csv = |name: &str, jobs: &str| {
        let path = dir.path().join(name);
        let p = path.to_str().unwrap();
        stdout(&run(&[
            "simulate",
            "--mask",
            &mask,
            "--snr",
            "1:3:1",
            "--seed",
            "5",
            "--max-trials",
            "2000",
            "--min-errors",
            "50",
            "--out",
            p,
            "--jobs",
            jobs,
        ]));
        std::fs::read_to_string(path).unwrap()
    };
    let a = csv("a.csv", "1");
    let b = csv("b.csv", "2");
    assert_eq!(a, b);
    assert!(a.starts_with("snr_db,trials,frame_errors,bit_errors,fer,ber,ci95\n"));
    assert_eq!(a.lines().count(), 4);
}

#[test]
fn simulate_high_snr_and_env_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let mask = construct(dir.path(), 64, 32);
    let out = bin()
        .env("POLAR_JOBS", "2")
        .args([
            "simulate",
            "--mask",
            &mask,
            "--snr",
            "10:10:1",
            "--max-trials",
            "300",
            "--qbits",
            "5",
        ])
        .output()
        .unwrap();
    let text = stdout(&out);
    assert_eq!(text.lines().nth(1).unwrap(), "10,300,0,0,0,0,0");
}

#[test]
fn simulate_rejects_missing_mask() {
    let o = run(&["simulate", "--mask", "/nonexistent/mask", "--snr", "1:2:1"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("mask"));
}

#[test]
fn hybrid_table() {
    let out = stdout(&run(&[
        "hybrid",
        "--n",
        "1024",
        "--nprime",
        "16",
        "--p",
        "64",
        "--fc",
        "173e6",
        "--comb-tp",
        "1.05e9",
    ]));
    let row: Vec<&str> = out.lines().nth(1).unwrap().split_whitespace().collect();
    let gain: f64 = row[6].parse().unwrap();
    let tp: f64 = row[8].parse().unwrap();
    assert!((gain - 5.90).abs() / 5.90 < 0.015);
    assert!((tp - 501.0).abs() / 501.0 < 0.015);

    let out = stdout(&run(&[
        "hybrid",
        "--n",
        "2048",
        "--nprime",
        "64",
        "--p",
        "64",
        "--fc",
        "171e6",
        "--comb-tp",
        "0.85e9",
    ]));
    let row: Vec<&str> = out.lines().nth(1).unwrap().split_whitespace().collect();
    let gain: f64 = row[6].parse().unwrap();
    assert!((gain - 7.27).abs() / 7.27 < 0.015);

    let sweep = stdout(&run(&["hybrid", "--n", "1024", "--fc", "173e6"]));
    assert_eq!(sweep.lines().count(), 4);

    stdout(&run(&[
        "hybrid",
        "--n",
        "1024",
        "--nprime",
        "1024",
        "--fc",
        "173e6",
        "--comb-delay",
        "1e-6",
    ]));
    assert!(
        !run(&["hybrid", "--n", "1024", "--nprime", "16", "--p", "512", "--fc", "1e8"])
            .status
            .success()
    );
}

#[test]
fn analyze_reports() {
    let out = stdout(&run(&[
        "analyze", "--n", "1024", "--freq", "2.5e6", "--power", "0.1907", "--area", "3.213e-6",
    ]));
    assert!(out.contains("2.5600 Gb/s"));
    assert!(out.contains("74.49"));
    assert!(out.contains("796.8"));

    let out = stdout(&run(&["analyze", "--n", "8"]));
    assert!(out.contains("model delay D_N        25\n"));

    let out = stdout(&run(&["analyze", "--n", "4"]));
    assert!(out.contains("comparators c_N        2\n"));
    assert!(out.contains("total blocks           8\n"));

    let out = stdout(&run(&[
        "analyze", "--n", "64", "--alpha", "0.5", "--cap", "2e-9", "--vdd", "1.3", "--fclk",
        "2.5e6",
    ]));
    assert!(out.contains("dynamic power          4.2250e-3 W"));
}

#[test]
fn pipeline_schedule() {
    let out = stdout(&run(&[
        "pipeline",
        "--n",
        "16",
        "--comb-delay",
        "15.24e-9",
        "--stages",
        "1",
        "--schedule",
        "6",
    ]));
    assert!(out.contains("throughput        2.0997 Gb/s"));
    let last = out.lines().last().unwrap();
    assert_eq!(
        last.split_whitespace().collect::<Vec<_>>(),
        ["8", "u6", "u6"]
    );
}
