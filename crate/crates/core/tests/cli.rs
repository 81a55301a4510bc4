use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use num_complex::Complex64;
use singlet_qkd::cli::{
    cmd_verify, cmd_verify_with, parse_config, sweep, CliError, CodewordSource, LibraryCodewords, SweepAxis,
};
use singlet_qkd::codewords::{QuartetIndex, TrioIndex};
use singlet_qkd::protocol::MessageTranscript;
use singlet_qkd::qmath::{DensityMatrix, StateVector};
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_singlet-qkd");

fn config(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn run_config(path: &Path, seed: &str, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--config", path.to_str().unwrap(), "--seed", seed];
    args.extend_from_slice(extra);
    run(&args)
}

fn field<'a>(report: &'a str, key: &str) -> &'a str {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(" = ")))
        .unwrap_or_else(|| panic!("missing {key} in\n{report}"))
}

#[test]
fn run_is_byte_identical_per_seed() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "default.toml", "");
    let a = run_config(&cfg, "1", &[]);
    let b = run_config(&cfg, "1", &[]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run_config(&cfg, "2", &[]);
    assert_ne!(a.stdout, c.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(field(&text, "aborted"), "false");
    assert_eq!(field(&text, "test_qber"), "0");
}

#[test]
fn early_announcement_hands_eve_the_key() {
    let dir = TempDir::new().unwrap();
    let cfg = config(
        &dir,
        "usd.toml",
        "attack = \"usd\"\nannounce_b_early = true\ndelta = 6.0\nloss_probability = 0.1591035847462855\n",
    );
    let transcript = dir.path().join("t.jsonl");
    let out = run_config(&cfg, "4", &["--transcript", transcript.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(field(&text, "aborted"), "false");
    assert_ne!(field(&text, "final_key_length"), "0");
    assert_eq!(field(&text, "eve_information"), field(&text, "final_key_length"));
    let t = MessageTranscript::from_lines(&std::fs::read_to_string(transcript).unwrap()).unwrap();
    assert!(t.announces_b_before_receipt());
}

#[test]
fn invalid_configs_fail_loudly() {
    let dir = TempDir::new().unwrap();
    for (name, body) in [("zero.toml", "n = 0\n"), ("typo.toml", "rounds = 10\n"), ("loss.toml", "loss_probability = 2.0\n")] {
        let out = run_config(&config(&dir, name, body), "1", &[]);
        assert!(!out.status.success(), "{name}");
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }
    let out = run_config(&dir.path().join("missing.toml"), "1", &[]);
    assert!(!out.status.success());
}

#[test]
fn out_file_and_csv_format() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "c.toml", "n = 50\n");
    let path = dir.path().join("report.txt");
    let out = run_config(&cfg, "3", &["--out", path.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    let stdout = run_config(&cfg, "3", &[]).stdout;
    assert_eq!(std::fs::read(&path).unwrap(), stdout);

    let csv = String::from_utf8(run_config(&cfg, "3", &["--format", "csv"]).stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("variant,attack,"));
    assert_eq!(lines[0].split(',').count(), lines[1].split(',').count());
}

#[test]
fn default_transcript_announces_after_receipt() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "c.toml", "variant = \"trio_via_discard\"\nn = 60\n");
    let path = dir.path().join("t.jsonl");
    assert!(run_config(&cfg, "9", &["--transcript", path.to_str().unwrap()]).status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let t = MessageTranscript::from_lines(&text).unwrap();
    assert!(!t.announces_b_before_receipt());
    assert_eq!(t.to_lines(), text);
    assert!(text.contains("\"discards\""));
}

#[test]
fn loss_sweep_shrinks_sifted_key() {
    let base = parse_config("n = 100\n").unwrap();
    let values: Vec<String> = ["0", "0.1", "0.3", "0.5", "0.7", "0.9"].map(String::from).to_vec();
    let rows = sweep(&base, SweepAxis::LossProbability, &values, 12).unwrap();
    assert_eq!(rows.len(), values.len());
    for w in rows.windows(2) {
        assert!(w[1].mean_sifted_length <= w[0].mean_sifted_length, "{w:?}");
    }
    assert_eq!(rows[0].aborted, 0);
    assert_eq!(rows[5].aborted, 12);
}

#[test]
fn attack_sweep_separates_qber() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "c.toml", "n = 100\ndelta = 3.0\n");
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--axis",
        "attack",
        "--values",
        "none,intercept_resend",
        "--seeds",
        "6",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let header: Vec<&str> = lines[0].split(',').collect();
    let qber = header.iter().position(|h| *h == "mean_test_qber").unwrap();
    let row = |i: usize| lines[i].split(',').nth(qber).unwrap().parse::<f64>().unwrap();
    assert!(lines[1].starts_with("none,"));
    assert_eq!(row(1), 0.0);
    assert!(row(2) > 0.0);
}

#[test]
fn sweep_edge_cases() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "c.toml", "");
    let c = cfg.to_str().unwrap();
    let empty = run(&["sweep", "--config", c, "--axis", "n", "--values", ""]);
    assert!(empty.status.success());
    assert!(empty.stdout.is_empty());
    let bad = run(&["sweep", "--config", c, "--axis", "colour", "--values", "1"]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("colour"));
    let bad_value = run(&["sweep", "--config", c, "--axis", "n", "--values", "0"]);
    assert!(!bad_value.status.success());
}

#[test]
fn verify_passes_and_is_deterministic() {
    let a = run(&["verify"]);
    let b = run(&["verify"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stdout));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.lines().all(|l| l.starts_with("PASS ")));

    let mut buf = Vec::new();
    cmd_verify(&mut buf).unwrap();
    assert_eq!(buf, text.as_bytes());
}

/// ψ₂ built with the wrong relative sign.
struct FlippedPsi2;

impl CodewordSource for FlippedPsi2 {
    fn quartet(&self, i: QuartetIndex) -> StateVector {
        if i.value() != 2 {
            return LibraryCodewords.quartet(i);
        }
        let h = 0.5;
        let mut amps = vec![Complex64::new(0.0, 0.0); 16];
        for idx in [0b0011, 0b1100, 0b0110, 0b1001] {
            amps[idx] = Complex64::new(h, 0.0);
        }
        StateVector::new(amps).unwrap()
    }

    fn trio(&self, i: TrioIndex) -> DensityMatrix {
        LibraryCodewords.trio(i)
    }
}

#[test]
fn sign_flip_fails_the_overlap_check() {
    let mut buf = Vec::new();
    let err = cmd_verify_with(&FlippedPsi2, &mut buf).unwrap_err();
    let CliError::Verify(failed) = err else { panic!("{err}") };
    assert!(failed.iter().any(|n| n == "overlap:span"), "{failed:?}");
    assert!(failed.iter().any(|n| n == "invariance:psi2"));
    let text = String::from_utf8(buf).unwrap();
    assert!(text.contains("FAIL overlap:span"));
}
