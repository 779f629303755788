use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn mfmsd(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mfmsd"));
    cmd.args(args);
    for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with("MFMSD_")) {
        cmd.env_remove(k);
    }
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

const FILES: [&str; 5] = [
    "encoder.circ",
    "decoder.circ",
    "decoder_simplified.circ",
    "flip_table.txt",
    "cfn.circ",
];

#[test]
fn synthesize_writes_stable_artifacts() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for dir in [&a, &b] {
        let o = mfmsd(&["synthesize", "--out", dir.path().to_str().unwrap()], &[]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in FILES {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
    let table = read(a.path(), "flip_table.txt");
    let entries = table
        .lines()
        .filter(|l| l.starts_with("Z ") || l.starts_with("X "))
        .count();
    assert_eq!(entries, 30);
    let cfn = read(a.path(), "cfn.circ");
    for backend in ["exact_pattern", "anf", "controlled_reset"] {
        assert!(cfn.contains(&format!("# backend {backend}\n")), "{backend}");
    }
}

#[test]
fn inexpressible_backend_is_an_error() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = mfmsd(
        &[
            "synthesize",
            "--decoder",
            "simplified",
            "--backend",
            "controlled_reset",
            "--out",
            out,
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(1));
    let o = mfmsd(
        &["synthesize", "--decoder", "simplified", "--out", out],
        &[],
    );
    assert!(o.status.success());
    assert!(read(dir.path(), "cfn.circ").contains("# backend controlled_reset: "));
}

#[test]
fn verify_passes_and_catches_mutations() {
    let dir = TempDir::new().unwrap();
    let o = mfmsd(&["verify"], &[]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));

    assert!(
        mfmsd(&["synthesize", "--out", dir.path().to_str().unwrap()], &[])
            .status
            .success()
    );
    let decoder = read(dir.path(), "decoder.circ");
    let first_cx = decoder.lines().position(|l| l.starts_with("CX ")).unwrap();
    let broken: Vec<&str> = decoder
        .lines()
        .enumerate()
        .filter(|&(i, _)| i != first_cx)
        .map(|(_, l)| l)
        .collect();
    let broken_path = dir.path().join("broken.circ");
    fs::write(&broken_path, broken.join("\n")).unwrap();
    let o = mfmsd(
        &["verify", "--decoder-file", broken_path.to_str().unwrap()],
        &[],
    );
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));

    let empty_path = dir.path().join("empty.circ");
    fs::write(
        &empty_path,
        decoder.lines().find(|l| !l.starts_with('#')).unwrap(),
    )
    .unwrap();
    let o = mfmsd(&["verify", "--cfn-file", empty_path.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}

fn data_rows(text: &str) -> Vec<&str> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("p,"))
        .collect()
}

#[test]
fn figure2_rows_and_header() {
    let o = mfmsd(
        &[
            "figure2",
            "--p-grid",
            "0.001,0.005,0.01",
            "--rounds",
            "1",
            "--trials",
            "2000",
            "--seed",
            "42",
        ],
        &[],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(data_rows(&text).len(), 3);
    assert!(text.contains("# seed = 42"));
    assert!(text.contains("# backend = exact_pattern"));
    let again = stdout(&mfmsd(
        &[
            "figure2",
            "--p-grid",
            "0.001,0.005,0.01",
            "--rounds",
            "1",
            "--trials",
            "2000",
            "--seed",
            "42",
        ],
        &[],
    ));
    assert_eq!(text, again);
}

#[test]
fn bad_input_is_a_usage_error() {
    assert_eq!(
        mfmsd(&["census", "--backend", "nope"], &[]).status.code(),
        Some(2)
    );
    assert_eq!(
        mfmsd(&["montecarlo", "--p-grid", "2.0"], &[]).status.code(),
        Some(2)
    );
    assert_eq!(mfmsd(&["frobnicate"], &[]).status.code(), Some(2));
    assert_eq!(
        mfmsd(&["census", "--config", "/nonexistent.toml"], &[])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn flags_beat_environment_beat_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "p_grid = [0.01]\ntrials = 300\nseed = 5\nbackend = \"anf\"\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();

    let from_file = stdout(&mfmsd(&["montecarlo", "--config", cfg], &[]));
    assert!(from_file.contains("# seed = 5"));
    assert!(from_file.contains("# trials = 300"));
    assert!(from_file.contains("# backend = anf"));

    let from_env = stdout(&mfmsd(
        &["montecarlo", "--config", cfg],
        &[("MFMSD_SEED", "6")],
    ));
    assert!(from_env.contains("# seed = 6"));

    let from_flag = stdout(&mfmsd(
        &["montecarlo", "--config", cfg, "--seed", "7"],
        &[("MFMSD_SEED", "6")],
    ));
    assert!(from_flag.contains("# seed = 7"));
    assert!(from_flag.contains("# trials = 300"));

    fs::write(dir.path().join("bad.toml"), "colour = 1\n").unwrap();
    let bad = dir.path().join("bad.toml");
    assert_eq!(
        mfmsd(&["census", "--config", bad.to_str().unwrap()], &[])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn census_and_threshold_output() {
    let text = stdout(&mfmsd(&["census"], &[]));
    assert!(text.contains("\n2,105,105\n"));
    assert!(text.contains("\n1,15,0\n"));
    let text = stdout(&mfmsd(&["threshold"], &[]));
    let exact = text.lines().find(|l| l.starts_with("exact,")).unwrap();
    let p: f64 = exact.split(',').nth(1).unwrap().parse().unwrap();
    assert!((p - 0.01093).abs() < 1e-5);
}

#[test]
fn coherent_probe_reports_unit_fidelity() {
    let o = mfmsd(
        &["coherent-probe", "--thetas", "0.3,1.7", "--wires", "6"],
        &[],
    );
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("theta"))
        .collect();
    assert_eq!(rows.len(), 2);
    for r in rows {
        let f: f64 = r.rsplit(',').next().unwrap().parse().unwrap();
        assert!((f - 1.0).abs() < 1e-9);
    }
    assert_eq!(
        mfmsd(&["coherent-probe", "--wires", "15"], &[])
            .status
            .code(),
        Some(2)
    );
}
