//! Command-line front end: configuration files, single runs, sweeps and the
//! built-in invariant check.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use crate::channel::{ChannelConfig, NoiseMode};
use crate::codewords::{quartet_state, trio_state, Codeword, CodewordPair, QuartetIndex, TrioIndex};
use crate::decoder::{classify, BasisChoice, Classification};
use crate::protocol::amplify::PaRate;
use crate::protocol::reconcile::ReconcileParams;
use crate::protocol::{run_session, ProtocolConfig, ProtocolError, SessionReport, Variant};
use crate::qmath::{
    apply_collective, haar_su2, outcome_distribution, partial_trace, DensityMatrix, State, StateVector,
};
use crate::streams::{Domain, SeedSplitter};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("unknown sweep axis {0:?} (expected loss_probability, walk_step, attack or n)")]
    UnknownAxis(String),
    #[error("bad value {value:?} for axis {axis}: {message}")]
    AxisValue {
        axis: &'static str,
        value: String,
        message: String,
    },
    #[error("failed properties: {}", .0.join(", "))]
    Verify(Vec<String>),
    #[error("write failed: {0}")]
    Output(#[from] std::io::Error),
}

/// Flat config file; every key mirrors a protocol setting and is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub variant: Option<Variant>,
    pub n: Option<usize>,
    pub delta: Option<f64>,
    pub error_threshold: Option<f64>,
    pub noise_mode: Option<NoiseMode>,
    pub walk_step: Option<f64>,
    pub loss_probability: Option<f64>,
    pub attack: Option<String>,
    pub announce_b_early: Option<bool>,
    pub security_margin: Option<usize>,
    pub check_parities: Option<usize>,
    pub max_passes: Option<usize>,
}

impl ConfigFile {
    pub fn into_config(self) -> Result<ProtocolConfig, CliError> {
        let d = ProtocolConfig::default();
        let attack = match self.attack {
            Some(name) => name.parse().map_err(|e: crate::adversary::AttackError| CliError::Config(e.to_string()))?,
            None => d.attack,
        };
        let cfg = ProtocolConfig {
            variant: self.variant.unwrap_or(d.variant),
            n: self.n.unwrap_or(d.n),
            delta: self.delta.unwrap_or(d.delta),
            error_threshold: self.error_threshold.unwrap_or(d.error_threshold),
            channel: ChannelConfig {
                noise_mode: self.noise_mode.unwrap_or(d.channel.noise_mode),
                walk_step: self.walk_step.unwrap_or(d.channel.walk_step),
                loss_probability: self.loss_probability.unwrap_or(d.channel.loss_probability),
            },
            attack,
            announce_b_early: self.announce_b_early.unwrap_or(d.announce_b_early),
            pa_rate: PaRate {
                security_margin: self.security_margin.unwrap_or(d.pa_rate.security_margin),
            },
            reconcile: ReconcileParams {
                check_parities: self.check_parities.unwrap_or(d.reconcile.check_parities),
                max_passes: self.max_passes.unwrap_or(d.reconcile.max_passes),
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn parse_config(text: &str) -> Result<ProtocolConfig, CliError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;
    file.into_config()
}

pub fn load_config(path: &Path) -> Result<ProtocolConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

/// Decimal string with 12 significant digits, trailing zeros removed.
pub fn format_rate(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    let scale = 10f64.powi(magnitude - 11);
    let rounded = if decimals == 0 { (x / scale).round() * scale } else { x };
    let mut s = format!("{rounded:.decimals$}");
    if s.contains('.') {
        s.truncate(s.trim_end_matches('0').trim_end_matches('.').len());
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

fn report_fields(r: &SessionReport) -> Vec<(&'static str, String)> {
    let opt = |v: Option<usize>| v.map_or_else(|| "none".to_string(), |v| v.to_string());
    vec![
        ("variant", r.variant.to_string()),
        ("attack", r.attack.to_string()),
        ("attack_refused", r.attack_refused.to_string()),
        ("rounds_sent", r.rounds_sent.to_string()),
        ("rounds_lost", r.rounds_lost.to_string()),
        ("conclusive_count", r.conclusive_count.to_string()),
        ("inconclusive_count", r.inconclusive_count.to_string()),
        ("tamper_count", r.tamper_count.to_string()),
        ("sifted_length", r.sifted_length.to_string()),
        ("test_size", r.test_size.to_string()),
        ("test_errors", r.test_errors.to_string()),
        ("test_qber", format_rate(r.test_qber)),
        ("detection_rate", format_rate(r.detection_rate())),
        ("aborted", r.aborted.to_string()),
        ("abort_reason", r.abort_reason.as_ref().map_or("none".into(), |a| a.to_string())),
        ("reconciliation_leakage", r.reconciliation_leakage.to_string()),
        ("final_key_length", r.final_key_length.to_string()),
        ("eve_information", opt(r.eve_information)),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    /// One `key = value` line per statistic.
    #[default]
    Text,
    /// Header row plus one value row.
    Csv,
}

pub fn format_report(report: &SessionReport, format: OutputFormat) -> String {
    let fields = report_fields(report);
    match format {
        OutputFormat::Text => fields.iter().map(|(k, v)| format!("{k} = {v}\n")).collect(),
        OutputFormat::Csv => {
            let header: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
            let row: Vec<&str> = fields.iter().map(|(_, v)| v.as_str()).collect();
            format!("{}\n{}\n", header.join(","), row.join(","))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub config: PathBuf,
    pub seed: u64,
    pub transcript: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs one session. Aborted sessions are reported, not errors.
pub fn cmd_run(spec: &RunSpec, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load_config(&spec.config)?;
    let outcome = run_session(&cfg, spec.seed)?;
    if let Some(path) = &spec.transcript {
        write_file(path, &outcome.transcript.to_lines())?;
    }
    let text = format_report(&outcome.report, spec.format);
    match &spec.out {
        Some(path) => write_file(path, &text),
        None => Ok(stdout.write_all(text.as_bytes())?),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    LossProbability,
    WalkStep,
    Attack,
    N,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::LossProbability => "loss_probability",
            SweepAxis::WalkStep => "walk_step",
            SweepAxis::Attack => "attack",
            SweepAxis::N => "n",
        }
    }

    /// Applies one axis value to a base config.
    pub fn apply(self, base: &ProtocolConfig, value: &str) -> Result<ProtocolConfig, CliError> {
        let bad = |message: String| CliError::AxisValue {
            axis: self.name(),
            value: value.to_string(),
            message,
        };
        let mut cfg = *base;
        match self {
            SweepAxis::LossProbability => cfg.channel.loss_probability = value.parse().map_err(|e| bad(format!("{e}")))?,
            SweepAxis::WalkStep => cfg.channel.walk_step = value.parse().map_err(|e| bad(format!("{e}")))?,
            SweepAxis::Attack => cfg.attack = value.parse().map_err(|e| bad(format!("{e}")))?,
            SweepAxis::N => cfg.n = value.parse().map_err(|e| bad(format!("{e}")))?,
        }
        cfg.validate().map_err(|e| bad(e.to_string()))?;
        Ok(cfg)
    }
}

impl FromStr for SweepAxis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "loss_probability" | "loss" => Ok(SweepAxis::LossProbability),
            "walk_step" => Ok(SweepAxis::WalkStep),
            "attack" => Ok(SweepAxis::Attack),
            "n" => Ok(SweepAxis::N),
            other => Err(CliError::UnknownAxis(other.to_string())),
        }
    }
}

/// Averages over the seeds of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: String,
    pub seeds: u64,
    pub aborted: u64,
    pub mean_sifted_length: f64,
    pub mean_test_qber: f64,
    pub mean_tamper_count: f64,
    pub mean_detection_rate: f64,
    pub mean_final_key_length: f64,
}

pub const SWEEP_HEADER: &str =
    "seeds,aborted,mean_sifted_length,mean_test_qber,mean_tamper_count,mean_detection_rate,mean_final_key_length";

/// Runs sessions with seeds `0..seeds` at every value; rows keep the order
/// of `values`.
pub fn sweep(
    base: &ProtocolConfig,
    axis: SweepAxis,
    values: &[String],
    seeds: u64,
) -> Result<Vec<SweepRow>, CliError> {
    let configs: Vec<ProtocolConfig> = values.iter().map(|v| axis.apply(base, v)).collect::<Result<_, _>>()?;
    let jobs: Vec<(usize, u64)> = (0..configs.len()).flat_map(|i| (0..seeds).map(move |s| (i, s))).collect();
    let reports: Vec<SessionReport> = jobs
        .par_iter()
        .map(|&(i, s)| run_session(&configs[i], s).map(|o| o.report))
        .collect::<Result<_, _>>()?;
    Ok(values
        .iter()
        .zip(reports.chunks(seeds.max(1) as usize))
        .map(|(value, chunk)| {
            let k = chunk.len().max(1) as f64;
            let mean = |f: &dyn Fn(&SessionReport) -> f64| chunk.iter().map(f).sum::<f64>() / k;
            SweepRow {
                value: value.clone(),
                seeds,
                aborted: chunk.iter().filter(|r| r.aborted).count() as u64,
                mean_sifted_length: mean(&|r| r.sifted_length as f64),
                mean_test_qber: mean(&|r| r.test_qber),
                mean_tamper_count: mean(&|r| r.tamper_count as f64),
                mean_detection_rate: mean(&|r| r.detection_rate()),
                mean_final_key_length: mean(&|r| r.final_key_length as f64),
            }
        })
        .collect())
}

pub fn format_sweep(axis: SweepAxis, rows: &[SweepRow]) -> String {
    let mut out = format!("{},{SWEEP_HEADER}\n", axis.name());
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.value,
            r.seeds,
            r.aborted,
            format_rate(r.mean_sifted_length),
            format_rate(r.mean_test_qber),
            format_rate(r.mean_tamper_count),
            format_rate(r.mean_detection_rate),
            format_rate(r.mean_final_key_length),
        );
    }
    out
}

/// Values of a comma-separated list; an empty list has no values.
pub fn split_values(csv: &str) -> Vec<String> {
    csv.split(',').map(str::trim).filter(|v| !v.is_empty()).map(String::from).collect()
}

pub fn cmd_sweep(
    config: &Path,
    axis: &str,
    values: &[String],
    seeds: u64,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let axis: SweepAxis = axis.parse()?;
    let base = load_config(config)?;
    if values.is_empty() {
        return Ok(());
    }
    let rows = sweep(&base, axis, values, seeds)?;
    stdout.write_all(format_sweep(axis, &rows).as_bytes())?;
    Ok(())
}

/// Source of the codeword states checked by [`verify`]; lets tests inject
/// faulty constructions.
pub trait CodewordSource: Sync {
    fn quartet(&self, i: QuartetIndex) -> StateVector;
    fn trio(&self, i: TrioIndex) -> DensityMatrix;
}

/// The library's own codewords.
#[derive(Debug, Clone, Copy, Default)]
pub struct LibraryCodewords;

impl CodewordSource for LibraryCodewords {
    fn quartet(&self, i: QuartetIndex) -> StateVector {
        quartet_state(i)
    }

    fn trio(&self, i: TrioIndex) -> DensityMatrix {
        trio_state(i)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

pub const VERIFY_SEED: u64 = 0x5eed_0fca_11ed;
const VERIFY_UNITARIES: u64 = 200;

fn det3(g: &[[Complex64; 3]; 3]) -> Complex64 {
    g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
        + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
}

fn codeword_state(src: &dyn CodewordSource, c: Codeword) -> State {
    match c {
        Codeword::Quartet(i) => State::Pure(src.quartet(i)),
        Codeword::Trio(i) => State::Mixed(src.trio(i)),
    }
}

fn all_pairs() -> Vec<CodewordPair> {
    let mut pairs = Vec::new();
    for t in 0..3 {
        pairs.push(CodewordPair::quartet_for_trit(t).expect("valid trit"));
        pairs.push(CodewordPair::trio_for_trit(t).expect("valid trit"));
    }
    pairs
}

/// Checks overlaps, noise invariance, decoding soundness, tamper
/// completeness, conclusive rates and discard equivalence.
pub fn verify(src: &dyn CodewordSource) -> Vec<PropertyCheck> {
    let mut checks = Vec::new();
    let mut push = |name: String, passed: bool, detail: String| checks.push(PropertyCheck { name, passed, detail });

    let psi = QuartetIndex::all().map(|i| src.quartet(i));
    for i in 0..3 {
        for j in i + 1..3 {
            let ov = psi[i].inner(&psi[j]).map(|z| z.norm()).unwrap_or(f64::NAN);
            push(
                format!("overlap:psi{}-psi{}", i + 1, j + 1),
                (ov - 0.5).abs() < 1e-12,
                format!("|<psi{}|psi{}>| = {ov:.12}", i + 1, j + 1),
            );
        }
    }
    let mut gram = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            gram[i][j] = psi[i].inner(&psi[j]).unwrap_or(Complex64::new(f64::NAN, 0.0));
        }
    }
    let det = det3(&gram).norm();
    push("overlap:span".into(), det < 1e-12, format!("gram determinant {det:.1e}"));

    let seeds = SeedSplitter::new(VERIFY_SEED);
    let unitaries: Vec<_> = (0..VERIFY_UNITARIES).map(|k| haar_su2(&mut seeds.stream(Domain::Verify, k))).collect();
    for (idx, i) in QuartetIndex::all().into_iter().enumerate() {
        let worst = unitaries
            .iter()
            .map(|u| {
                let moved = apply_collective(u, &psi[idx]).expect("unitary");
                (1.0 - psi[idx].fidelity(&moved).unwrap_or(0.0)).abs()
            })
            .fold(0.0, f64::max);
        push(format!("invariance:{}", Codeword::Quartet(i)), worst < 1e-10, format!("max |1 - F| = {worst:.1e}"));
    }
    for i in TrioIndex::all() {
        let rho = src.trio(i);
        let worst = unitaries
            .iter()
            .map(|u| {
                let moved = apply_collective(u, &rho).expect("unitary");
                rho.trace_distance(&moved).unwrap_or(f64::INFINITY)
            })
            .fold(0.0, f64::max);
        push(format!("invariance:{}", Codeword::Trio(i)), worst < 1e-10, format!("max trace distance {worst:.1e}"));
    }

    for pair in all_pairs() {
        let label = format!("{}/{}", pair.zero(), pair.one());
        let mut unsound = 0;
        let mut leaked = 0.0f64;
        let mut conclusive = [0.0; 2];
        for (b, basis) in [BasisChoice::Rectilinear, BasisChoice::Diagonal].into_iter().enumerate() {
            let dists = [pair.zero(), pair.one()].map(|c| outcome_distribution(&codeword_state(src, c), &basis.as_unitary()));
            for (o, &p0) in &dists[0] {
                let p1 = dists[1][o];
                match classify(o, &pair).expect("matching length") {
                    Classification::Conclusive(bit) => {
                        // The excluded codeword must never produce this outcome.
                        let excluded = if bit == 0 { p1 } else { p0 };
                        if excluded > 1e-12 {
                            unsound += 1;
                        }
                        conclusive[b] += 0.5 * (p0 + p1);
                    }
                    Classification::Tamper => leaked = leaked.max(p0).max(p1),
                    Classification::Inconclusive => {}
                }
            }
        }
        push(format!("soundness:{label}"), unsound == 0, format!("{unsound} conclusive outcomes possible for both"));
        push(format!("tamper:{label}"), leaked < 1e-12, format!("max tamper probability {leaked:.1e}"));
        let off = conclusive.iter().map(|c| (c - 0.5).abs()).fold(0.0, f64::max);
        push(
            format!("conclusive_rate:{label}"),
            off < 1e-12,
            format!("rectilinear {} diagonal {}", conclusive[0], conclusive[1]),
        );
    }

    for (idx, i) in QuartetIndex::all().into_iter().enumerate() {
        let dm = psi[idx].to_density();
        for pos in 1..=4usize {
            let keep: Vec<usize> = (0..4).filter(|&q| q != pos - 1).collect();
            let diff = crate::codewords::trio_after_discard(i, pos)
                .ok()
                .and_then(|t| partial_trace(&dm, &keep).ok()?.max_abs_diff(&src.trio(t)).ok())
                .unwrap_or(f64::INFINITY);
            push(
                format!("discard:{}@{pos}", Codeword::Quartet(i)),
                diff < 1e-12,
                format!("max entry difference {diff:.1e}"),
            );
        }
    }
    checks
}

pub fn cmd_verify_with(src: &dyn CodewordSource, stdout: &mut dyn Write) -> Result<(), CliError> {
    let checks = verify(src);
    let mut failed = Vec::new();
    for c in &checks {
        writeln!(stdout, "{} {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        if !c.passed {
            failed.push(c.name.clone());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verify(failed))
    }
}

pub fn cmd_verify(stdout: &mut dyn Write) -> Result<(), CliError> {
    cmd_verify_with(&LibraryCodewords, stdout)
}

#[derive(Debug, Parser)]
#[command(name = "singlet-qkd", version, about = "Collective-noise-immune QKD simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one session and print its report.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Write the classical transcript as JSON lines.
        #[arg(long)]
        transcript: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Sweep one parameter over seeds `0..seeds` and print a CSV table.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        axis: String,
        #[arg(long, default_value = "")]
        values: String,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
    },
    /// Check the codeword invariants.
    Verify,
}

pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            config,
            seed,
            transcript,
            out,
            format,
        } => cmd_run(
            &RunSpec {
                config,
                seed,
                transcript,
                out,
                format,
            },
            stdout,
        ),
        Command::Sweep {
            config,
            axis,
            values,
            seeds,
        } => cmd_sweep(&config, &axis, &split_values(&values), seeds, stdout),
        Command::Verify => cmd_verify(stdout),
    }
}

/// Entry point for the binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    match execute(cli, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, CliError::Verify(_)) { 1 } else { 2 })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::AttackKind;

    #[test]
    fn rates_use_twelve_significant_digits() {
        assert_eq!(format_rate(0.0), "0");
        assert_eq!(format_rate(0.25), "0.25");
        assert_eq!(format_rate(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_rate(2.0 / 3.0 * 1e-4), "0.0000666666666667");
        assert_eq!(format_rate(123.456), "123.456");
        assert_eq!(format_rate(1234567890123456.0), "1234567890120000");
    }

    #[test]
    fn config_keys_are_checked() {
        let cfg = parse_config("n = 50\nattack = \"intercept_resend\"\nnoise_mode = \"collective_random_walk\"\nwalk_step = 0.1\n").unwrap();
        assert_eq!(cfg.n, 50);
        assert_eq!(cfg.channel.noise_mode, NoiseMode::CollectiveRandomWalk);
        assert!(matches!(cfg.attack, AttackKind::InterceptResend(_)));
        assert!(matches!(parse_config("rounds = 4"), Err(CliError::Config(_))));
        assert!(matches!(parse_config("n = 0"), Err(CliError::Protocol(ProtocolError::EmptyBlock))));
        assert!(parse_config("attack = \"gamma_ray\"").is_err());
        assert!(parse_config("variant = \"quintet\"").is_err());
        assert_eq!(parse_config("").unwrap(), ProtocolConfig::default());
    }

    #[test]
    fn axes_parse() {
        assert_eq!("walk_step".parse::<SweepAxis>().unwrap(), SweepAxis::WalkStep);
        assert!(matches!("colour".parse::<SweepAxis>(), Err(CliError::UnknownAxis(_))));
        assert!(SweepAxis::LossProbability.apply(&ProtocolConfig::default(), "1.5").is_err());
        assert!(split_values("").is_empty());
        assert_eq!(split_values("0, 0.1,"), vec!["0", "0.1"]);
    }

    #[test]
    fn pristine_codewords_verify() {
        let checks = verify(&LibraryCodewords);
        let failed: Vec<_> = checks.iter().filter(|c| !c.passed).collect();
        assert!(failed.is_empty(), "{failed:?}");
        assert_eq!(checks, verify(&LibraryCodewords));
    }
}
