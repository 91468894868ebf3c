//! Command-line front end.
//!
//! Exit codes: 0 success, 1 internal error, 2 validation failure, 64 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::bench::{self, ExperimentConfig};
use crate::builder::{self, SeedUnitary, SymmetryMode};
use crate::channel::{certify_qssr, KrausChannel};
use crate::dimensions;
use crate::error::{Error, Result};
use crate::io::{self, StateInput};
use crate::sqs::{self, Sign, DEFAULT_SQS_TOL};
use crate::swap::SwapRepresentation;
use crate::SystemShape;

/// Seed used by every randomized command when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 20_240_501;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "qssr", version, about = "Build, certify and benchmark quantum-state synchronizer channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Construct a synchronizing channel and write it as JSON.
    Build(BuildArgs),
    /// Certify a channel, or check a state (optionally after a channel) for synchronization.
    Verify(VerifyArgs),
    /// Asynchronicity benchmark over Haar-random product inputs.
    Bench(BenchArgs),
    /// Minimal ancilla dimensions for a grid of (n, N).
    Table(TableArgs),
    /// Dimension counts for one configuration.
    Dims(DimsArgs),
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("mode").required(true).args(["sym", "antisym", "mixed"])))]
#[command(group(ArgGroup::new("seed_source").args(["seed_unitary", "random_seed"])))]
pub struct BuildArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long = "N")]
    pub local_dim: usize,
    #[arg(long = "M")]
    pub ancilla_dim: usize,
    #[arg(long)]
    pub sym: bool,
    #[arg(long)]
    pub antisym: bool,
    /// Symmetric and antisymmetric Kraus counts, as `S:A`.
    #[arg(long, value_name = "S:A")]
    pub mixed: Option<String>,
    /// JSON matrix file with the seed unitary (or isometry) on the slot space.
    #[arg(long, value_name = "FILE")]
    pub seed_unitary: Option<PathBuf>,
    /// Draw a Haar-random seed unitary with this seed.
    #[arg(long, value_name = "S")]
    pub random_seed: Option<u64>,
    /// JSON list of per-operator exchange representations (n = 2 only).
    #[arg(long, value_name = "FILE")]
    pub swap_reps: Option<PathBuf>,
    /// Comma-separated eigenvalue signs per operator, e.g. `+,-`.
    #[arg(long, value_name = "SIGNS", requires = "swap_reps")]
    pub signs: Option<String>,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("target").required(true).multiple(true).args(["channel", "state"])))]
pub struct VerifyArgs {
    pub channel: Option<PathBuf>,
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_SQS_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Emit a JSON verdict instead of text.
    #[arg(long)]
    pub json: bool,
    /// Exit with status 2 unless the verdict is positive.
    #[arg(long)]
    pub expect_sqs: bool,
    /// State file; checked directly, or after the channel when one is given.
    #[arg(long, value_name = "FILE")]
    pub state: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    pub channel: PathBuf,
    #[arg(long, default_value_t = 77)]
    pub states: usize,
    #[arg(long, default_value_t = 204_800)]
    pub shots: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Geometric sweep of shot counts, `lo:hi:steps`.
    #[arg(long, value_name = "LO:HI:STEPS", conflicts_with = "exact")]
    pub shots_sweep: Option<String>,
    /// Use exact output Bloch vectors (infinitely many shots).
    #[arg(long)]
    pub exact: bool,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum TableFormat {
    Pretty,
    Csv,
}

#[derive(Args, Debug)]
pub struct TableArgs {
    #[arg(long, default_value_t = 9)]
    pub n_max: u64,
    #[arg(long = "N-max", default_value_t = 4)]
    pub local_max: u64,
    #[arg(long, value_enum, default_value_t = TableFormat::Pretty)]
    pub format: TableFormat,
}

#[derive(Args, Debug)]
pub struct DimsArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long = "N")]
    pub local_dim: u64,
    #[arg(long = "M")]
    pub ancilla_dim: u64,
    /// Number of symmetric Kraus operators (defaults to M).
    #[arg(long)]
    pub sym_count: Option<u64>,
    #[arg(long)]
    pub json: bool,
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let command_line = argv.iter().map(|a| a.to_string_lossy()).collect::<Vec<_>>().join(" ");
    let stdout = std::io::stdout();
    match run(&cli.command, &command_line, &mut stdout.lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                EXIT_VALIDATION
            } else {
                EXIT_INTERNAL
            }
        }
    }
}

/// Runs a parsed command, writing human-readable output to `out`.
pub fn run(command: &Command, command_line: &str, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Build(a) => run_build(a, command_line, out),
        Command::Verify(a) => run_verify(a, out),
        Command::Bench(a) => run_bench(a, command_line, out),
        Command::Table(a) => run_table(a, out),
        Command::Dims(a) => run_dims(a, out),
    }
}

fn provenance(command_line: &str) -> Value {
    json!({ "tool": "qssr", "version": env!("CARGO_PKG_VERSION"), "command": command_line })
}

fn parse_mixed(spec: &str) -> Result<(usize, usize)> {
    let parse = |s: &str| s.trim().parse::<usize>().map_err(|_| Error::Argument(format!("bad --mixed value {spec:?}, expected S:A")));
    match spec.split_once(':') {
        Some((s, a)) => Ok((parse(s)?, parse(a)?)),
        None => Err(Error::Argument(format!("bad --mixed value {spec:?}, expected S:A"))),
    }
}

fn parse_signs(spec: &str) -> Result<Vec<Sign>> {
    spec.split(',').map(|s| Sign::parse(s.trim())).collect()
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawRep {
    Qubit { delta: f64, phi01: f64 },
    General { delta: f64, phases: Vec<Vec<f64>> },
}

/// `[{"delta": Δ, "phi01": φ}, ...]` or `[{"delta": Δ, "phases": [[...], ...]}, ...]`.
pub fn swap_reps_from_json(text: &str) -> Result<Vec<SwapRepresentation>> {
    let raw: Vec<RawRep> = serde_json::from_str(text).map_err(|e| Error::Parse(format!("swap representation file: {e}")))?;
    raw.into_iter()
        .map(|r| match r {
            RawRep::Qubit { delta, phi01 } => SwapRepresentation::new(delta, DMatrix::from_row_slice(2, 2, &[0.0, phi01, -phi01, 0.0])),
            RawRep::General { delta, phases } => {
                let n = phases.len();
                if phases.iter().any(|row| row.len() != n) {
                    return Err(Error::Parse("phase matrix must be square".into()));
                }
                SwapRepresentation::new(delta, DMatrix::from_row_iterator(n, n, phases.into_iter().flatten()))
            }
        })
        .collect()
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn run_build(a: &BuildArgs, command_line: &str, out: &mut dyn Write) -> Result<i32> {
    let shape = SystemShape::new(a.n, a.local_dim, a.ancilla_dim)?;
    let mut mode = match (&a.mixed, a.antisym) {
        (Some(m), _) => {
            let (s, asym) = parse_mixed(m)?;
            SymmetryMode::mixed(s, asym)
        }
        (None, true) => SymmetryMode::antisymmetric(),
        (None, false) => SymmetryMode::symmetric(),
    };
    let (seed, seed_meta) = match (&a.seed_unitary, a.random_seed) {
        (Some(path), _) => (SeedUnitary::Matrix(io::matrix_from_json(&read(path)?)?), json!({ "file": path.display().to_string() })),
        (None, Some(s)) => (SeedUnitary::Random(s), json!({ "random": s })),
        (None, None) => (SeedUnitary::Identity, json!("identity")),
    };
    let channel = match &a.swap_reps {
        Some(path) => {
            let reps = swap_reps_from_json(&read(path)?)?;
            match &a.signs {
                Some(s) => builder::build_mixed_representation(shape, &reps, &parse_signs(s)?, &seed)?,
                None => {
                    mode.swap_reps = Some(reps);
                    builder::build(shape, &mode, &seed)?
                }
            }
        }
        None => builder::build(shape, &mode, &seed)?,
    };
    let mut meta = provenance(command_line);
    meta["seed_unitary"] = seed_meta;
    io::save_channel(&a.out, &channel, Some(&meta))?;
    writeln!(
        out,
        "wrote {} (n={} N={} M={}, completeness deviation {:.3e})",
        a.out.display(),
        shape.n(),
        shape.local_dim(),
        shape.ancilla_dim(),
        channel.completeness_deviation()
    )?;
    Ok(EXIT_OK)
}

fn state_verdict(shape: &SystemShape, state: &StateInput, channel: Option<&KrausChannel>, tol: f64) -> Result<sqs::SqsVerdict> {
    match (channel, state) {
        (Some(ch), s) => {
            if ch.shape().system_dim() != shape.system_dim() || ch.shape().n() != shape.n() {
                return Err(Error::Dimension("state shape does not match channel".into()));
            }
            let output = match s {
                StateInput::Pure(p) => ch.apply_pure(p)?,
                StateInput::Mixed(r) => ch.apply(r)?,
            };
            sqs::is_sqs_mixed(&output, shape, tol)
        }
        (None, StateInput::Pure(p)) => sqs::is_sqs_pure(p, shape, tol),
        (None, StateInput::Mixed(r)) => sqs::is_sqs_mixed(r, shape, tol),
    }
}

fn run_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    if a.tol.is_nan() || a.tol < 0.0 {
        return Err(Error::Argument(format!("tolerance must be non-negative, got {}", a.tol)));
    }
    let channel = a.channel.as_deref().map(|p| io::channel_from_json(&read(p)?)).transpose()?.map(|f| f.channel);

    let positive = if let Some(path) = &a.state {
        let (shape, state) = io::state_from_json(&read(path)?)?;
        let v = state_verdict(&shape, &state, channel.as_ref(), a.tol)?;
        if a.json {
            let mut j = serde_json::to_value(&v).map_err(|e| Error::Invariant(e.to_string()))?;
            j["kind"] = json!(if channel.is_some() { "channel_output" } else { "state" });
            j["tol"] = json!(a.tol);
            writeln!(out, "{j}")?;
        } else {
            let word = if v.is_sqs { "yes" } else { "no" };
            writeln!(out, "SQS: {word}, max pair residual {:.3e} (tol {:e})", v.max_pair_residual, a.tol)?;
            for p in &v.per_pair {
                writeln!(out, "  pair ({}, {}): {:.3e}", p.i, p.j, p.residual)?;
            }
        }
        v.is_sqs
    } else {
        let ch = channel.as_ref().expect("clap requires a channel or a state");
        let v = certify_qssr(ch, a.samples, a.tol, a.seed)?;
        if a.json {
            let mut j = serde_json::to_value(&v).map_err(|e| Error::Invariant(e.to_string()))?;
            j["kind"] = json!("channel");
            j["tol"] = json!(a.tol);
            j["seed"] = json!(a.seed);
            j["completeness_deviation"] = json!(ch.completeness_deviation());
            j["witness"] = json!(v.witness_amplitudes());
            writeln!(out, "{j}")?;
        } else if v.is_qssr {
            writeln!(
                out,
                "QSSR: yes, residual < {:e} (worst pure {:.3e}, worst mixed {:.3e}, {} pure + {} mixed inputs)",
                a.tol, v.worst_residual, v.mixed_worst_residual, v.samples_tested, v.mixed_samples_tested
            )?;
        } else {
            writeln!(
                out,
                "QSSR: no, residual {:.3e} > {:e} (worst mixed {:.3e})",
                v.worst_residual.max(v.mixed_worst_residual),
                a.tol,
                v.mixed_worst_residual
            )?;
            if let Some(w) = v.witness_amplitudes() {
                writeln!(out, "witness: {}", json!(w))?;
            }
        }
        v.is_qssr
    };
    Ok(if a.expect_sqs && !positive { EXIT_VALIDATION } else { EXIT_OK })
}

fn parse_sweep(spec: &str) -> Result<Vec<u64>> {
    let bad = || Error::Argument(format!("bad --shots-sweep value {spec:?}, expected lo:hi:steps"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo = parts[0].trim().parse::<u64>().map_err(|_| bad())?;
    let hi = parts[1].trim().parse::<u64>().map_err(|_| bad())?;
    let steps = parts[2].trim().parse::<usize>().map_err(|_| bad())?;
    bench::shot_sweep(lo, hi, steps)
}

fn run_bench(a: &BenchArgs, command_line: &str, out: &mut dyn Write) -> Result<i32> {
    let file = io::channel_from_json(&read(&a.channel)?)?;
    let shot_counts: Vec<Option<u64>> = match (&a.shots_sweep, a.exact) {
        (Some(s), _) => parse_sweep(s)?.into_iter().map(Some).collect(),
        (None, true) => vec![None],
        (None, false) => vec![Some(a.shots)],
    };
    let mut reports = Vec::new();
    let mut medians = Vec::new();
    for shots in &shot_counts {
        let config = ExperimentConfig { num_states: a.states, shots: *shots, master_seed: a.seed };
        let exp = bench::run_experiment(&file.channel, &config)?;
        let label = shots.map_or_else(|| "inf".to_string(), |s| s.to_string());
        if shot_counts.len() > 1 {
            writeln!(out, "shots={label} {} A_median_final={}", exp.summary_line(), bench::median(&exp.final_values()))?;
        } else {
            writeln!(out, "{}", exp.summary_line())?;
        }
        medians.push(bench::median(&exp.final_values()));
        reports.extend(exp.reports);
    }
    if shot_counts.len() > 1 {
        let xs: Vec<f64> = shot_counts.iter().map(|s| s.expect("sweep has finite shots") as f64).collect();
        writeln!(out, "loglog_slope={}", bench::loglog_slope(&xs, &medians))?;
    }
    let provenance = vec![
        format!("qssr {}", env!("CARGO_PKG_VERSION")),
        format!("command: {command_line}"),
        format!("master_seed: {}", a.seed),
    ];
    let f = std::fs::File::create(&a.out)?;
    bench::write_csv(std::io::BufWriter::new(f), &provenance, &reports)?;
    Ok(EXIT_OK)
}

fn run_table(a: &TableArgs, out: &mut dyn Write) -> Result<i32> {
    let reports = dimensions::table(a.n_max, a.local_max)?;
    let text = match a.format {
        TableFormat::Pretty => dimensions::render_table_pretty(&reports),
        TableFormat::Csv => dimensions::render_table_csv(&reports),
    };
    write!(out, "{text}")?;
    Ok(EXIT_OK)
}

fn run_dims(a: &DimsArgs, out: &mut dyn Write) -> Result<i32> {
    let report = dimensions::DimReport::new(a.n, a.local_dim)?;
    let sym_count = a.sym_count.unwrap_or(a.ancilla_dim);
    let manifold = dimensions::manifold_dimension(a.n, a.local_dim, a.ancilla_dim, sym_count)?;
    let free = dimensions::free_parameter_count(a.n, a.local_dim, a.ancilla_dim)?;
    if a.json {
        let mut j = report.to_json();
        j["M"] = json!(a.ancilla_dim);
        j["sym_count"] = json!(sym_count);
        j["manifold_dimension"] = json!(manifold.to_string());
        j["free_parameters"] = json!(free.to_string());
        writeln!(out, "{j}")?;
    } else {
        writeln!(out, "symmetric subspace dimension: {}", report.sym_dim)?;
        writeln!(out, "antisymmetric subspace dimension: {}", report.asym_dim)?;
        writeln!(out, "minimal M (symmetric): {}", report.min_ancilla_sym)?;
        match &report.min_ancilla_asym {
            Some(m) => writeln!(out, "minimal M (antisymmetric): {m}")?,
            None => writeln!(out, "minimal M (antisymmetric): none (n > N)")?,
        }
        writeln!(out, "large-N asymptote n!: {}", report.asymptote)?;
        writeln!(out, "manifold dimension (M={}, sym_count={sym_count}): {manifold}", a.ancilla_dim)?;
        writeln!(out, "free parameters (M={}): {free}", a.ancilla_dim)?;
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String) {
        let cli = match Cli::try_parse_from(std::iter::once("qssr").chain(args.iter().copied())) {
            Ok(c) => c,
            Err(_) => return (EXIT_USAGE, String::new()),
        };
        let mut buf = Vec::new();
        let code = match run(&cli.command, "qssr test", &mut buf) {
            Ok(c) => c,
            Err(e) if e.is_validation() => EXIT_VALIDATION,
            Err(_) => EXIT_INTERNAL,
        };
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        assert_eq!(run_args(&["table", "--bogus"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["build", "--n", "2", "--N", "2", "--M", "2", "--out", "x.json"]).0, EXIT_USAGE);
    }

    #[test]
    fn dims_text_and_json() {
        let (code, text) = run_args(&["dims", "--n", "2", "--N", "2", "--M", "2"]);
        assert_eq!(code, 0);
        assert!(text.contains("minimal M (symmetric): 2"), "{text}");
        let (_, j) = run_args(&["dims", "--n", "2", "--N", "2", "--M", "2", "--json"]);
        let v: Value = serde_json::from_str(&j).unwrap();
        assert_eq!(v["free_parameters"], "11");
    }

    #[test]
    fn parsers() {
        assert_eq!(parse_mixed("1:1").unwrap(), (1, 1));
        assert!(parse_mixed("2").is_err());
        assert_eq!(parse_signs("+,-").unwrap(), vec![Sign::Plus, Sign::Minus]);
        assert_eq!(parse_sweep("100:100000:4").unwrap(), vec![100, 1000, 10_000, 100_000]);
        let reps = swap_reps_from_json(r#"[{"delta": 0, "phi01": 0}, {"delta": 0.5, "phases": [[0, 1], [-1, 0]]}]"#).unwrap();
        assert_eq!(reps[0], SwapRepresentation::standard(2));
        assert_eq!(reps[1].delta(), 0.5);
        assert!(swap_reps_from_json(r#"[{"delta": 0, "phases": [[0, 1], [1, 0]]}]"#).is_err());
    }
}
