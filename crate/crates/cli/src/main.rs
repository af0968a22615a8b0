//! `qdecohere` command-line driver.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error,
//! 3 calibration target unreachable, 4 verification failure.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use qdecohere_core::harness::{self, mean_fidelity, reference_channels, ExperimentResult};
use qdecohere_core::oracle::verify::{corrupted_bath_kraus, run_verification, VerifyOptions};
use qdecohere_core::oracle::KrausSource;
use qdecohere_core::report;
use qdecohere_core::{
    calibrate, CalibrationRequest, ChannelKind, DepolarizingMode, Error, ExperimentConfig,
    StateClass,
};

#[derive(Parser)]
#[command(
    name = "qdecohere",
    version,
    about = "Multi-qubit decoherence experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo fidelity statistics for one channel.
    Run(RunArgs),
    /// Find the channel parameter that reaches a target mean fidelity.
    Calibrate(CalibrateArgs),
    /// Compare production paths against the brute-force oracle.
    Verify(VerifyArgs),
    /// Run all four channels at the reference parameters.
    Reproduce(ReproduceArgs),
}

fn parse_channel(s: &str) -> Result<ChannelKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<DepolarizingMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_class(s: &str) -> Result<StateClass, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Clone, Debug)]
struct QubitList(Vec<usize>);

/// `2-6`, `1,2,3`, `2-4,8`.
fn parse_qubits(s: &str) -> Result<QubitList, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        let bad = || format!("invalid qubit list element {part:?}");
        if let Some((a, b)) = part.split_once('-') {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        return Err("empty qubit list".into());
    }
    Ok(QubitList(out))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    /// Number of histogram bins on [0, 1].
    #[arg(long, default_value_t = 50)]
    bins: usize,
    /// Worker threads (0 = automatic). Does not affect results.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_parser = parse_channel)]
    channel: ChannelKind,
    /// gamma1*t, gamma2*t, Gamma*t or p depending on the channel.
    #[arg(long, allow_negative_numbers = true)]
    param: f64,
    /// Depolarizing lift.
    #[arg(long, value_parser = parse_mode, default_value = "global")]
    mode: DepolarizingMode,
    /// Comma list of general, ghz, w.
    #[arg(long = "class", value_parser = parse_class, value_delimiter = ',', default_value = "general,ghz,w")]
    classes: Vec<StateClass>,
    /// Range `a-b` or comma list.
    #[arg(long, value_parser = parse_qubits, default_value = "1-8")]
    qubits: QubitList,
    #[arg(long, default_value_t = harness::DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long, value_parser = parse_channel)]
    channel: ChannelKind,
    #[arg(long, value_parser = parse_mode, default_value = "global")]
    mode: DepolarizingMode,
    /// Target mean fidelity.
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["match_channel", "match_param"])]
    target: Option<f64>,
    /// Take the target from this channel's mean fidelity.
    #[arg(long, value_parser = parse_channel, requires = "match_param")]
    match_channel: Option<ChannelKind>,
    #[arg(long, requires = "match_channel")]
    match_param: Option<f64>,
    #[arg(long, value_parser = parse_mode, default_value = "global")]
    match_mode: DepolarizingMode,
    /// Register size for the matched channel (default: 2 for collective, else 1).
    #[arg(long)]
    match_n: Option<usize>,
    /// Register size for the calibrated channel (default: 2 for collective, else 1).
    #[arg(long)]
    n_ref: Option<usize>,
    #[arg(long = "class", value_parser = parse_class, default_value = "general")]
    class: StateClass,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Monte-Carlo samples when no closed form exists.
    #[arg(long, default_value_t = 20_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 3)]
    max_n: usize,
    #[arg(long, default_value_t = 100)]
    states: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Negative control: use a bath Kraus set with a wrong constant.
    #[arg(long, hide = true)]
    corrupt_kraus: bool,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(long, default_value_t = harness::DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Unreachable(String),
    Verify(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Config(_) => 2,
            CliError::Unreachable(_) => 3,
            CliError::Verify(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Io { path, source } => write!(f, "I/O error on {}: {source}", path.display()),
            CliError::Unreachable(msg) => write!(f, "calibration failed: {msg}"),
            CliError::Verify(name) => write!(f, "verification failed: {name}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Unreachable { .. } => CliError::Unreachable(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes summary, histograms, figure description and manifest into `dir`.
fn write_bundle(
    dir: &Path,
    config: &ExperimentConfig,
    result: &ExperimentResult,
    format: Format,
) -> Result<Vec<String>, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files = Vec::new();
    let (name, body) = match format {
        Format::Csv => ("summary.csv", report::summary_csv(result)),
        Format::Json => ("summary.json", report::summary_json(result)),
    };
    write_file(&dir.join(name), &body)?;
    files.push(name.to_string());
    for entry in &result.entries {
        let name = report::histogram_file_name(entry);
        write_file(&dir.join(&name), &report::histogram_csv(entry))?;
        files.push(name);
    }
    write_file(&dir.join("figure.json"), &report::figure_json(result))?;
    files.push("figure.json".into());

    let mut stamped = result.clone();
    stamped.metadata.timestamp_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .ok()
        .map(|d| d.as_secs());
    write_file(
        &dir.join("manifest.json"),
        &report::manifest_json(config, &stamped, &files),
    )?;
    files.push("manifest.json".into());
    Ok(files)
}

fn print_summary(result: &ExperimentResult) {
    println!(
        "{:<13} {:<8} {:>2} {:>8} {:>12} {:>12}",
        "channel", "class", "n", "samples", "mean", "variance"
    );
    for e in &result.entries {
        println!(
            "{:<13} {:<8} {:>2} {:>8} {:>12.6} {:>12.3e}",
            e.channel.kind().name(),
            e.class.name(),
            e.n,
            e.stats.count,
            e.stats.mean,
            e.stats.variance
        );
    }
    for s in &result.skipped {
        eprintln!(
            "skipped {} {} n={}: {}",
            s.channel.kind(),
            s.class,
            s.n,
            s.reason
        );
    }
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let spec = args.channel.with_parameter(args.param, args.mode);
    spec.validate()?;
    let config = ExperimentConfig {
        channels: vec![spec],
        classes: args.classes,
        qubit_counts: args.qubits.0,
        samples: args.samples,
        master_seed: args.seed,
        bins: args.output.bins,
        workers: args.output.workers,
    };
    let result = harness::run(&config)?;
    print_summary(&result);
    write_bundle(&args.output.out, &config, &result, args.output.format)?;
    Ok(())
}

fn cmd_reproduce(args: ReproduceArgs) -> Result<(), CliError> {
    for spec in reference_channels() {
        let qubits: Vec<usize> = match spec.kind() {
            ChannelKind::Collective => vec![2, 4, 6, 8],
            _ => (1..=8).collect(),
        };
        let config = ExperimentConfig {
            channels: vec![spec],
            classes: StateClass::ALL.to_vec(),
            qubit_counts: qubits,
            samples: args.samples,
            master_seed: args.seed,
            bins: args.output.bins,
            workers: args.output.workers,
        };
        let result = harness::run(&config)?;
        print_summary(&result);
        let dir = args.output.out.join(spec.kind().name());
        write_bundle(&dir, &config, &result, args.output.format)?;
    }
    Ok(())
}

fn default_n(kind: ChannelKind) -> usize {
    if kind == ChannelKind::Collective {
        2
    } else {
        1
    }
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<(), CliError> {
    let target = match (args.target, args.match_channel, args.match_param) {
        (Some(t), _, _) => t,
        (None, Some(kind), Some(param)) => {
            let spec = kind.with_parameter(param, args.match_mode);
            let n = args.match_n.unwrap_or_else(|| default_n(kind));
            mean_fidelity(&spec, args.class, n, args.samples, args.seed)?.0
        }
        _ => {
            return Err(CliError::Config(
                "calibrate needs --target or --match-channel with --match-param".into(),
            ))
        }
    };
    let request = CalibrationRequest {
        family: args.channel,
        mode: args.mode,
        class: args.class,
        n_ref: args.n_ref.unwrap_or_else(|| default_n(args.channel)),
        target_mean: target,
        samples: args.samples,
        seed: args.seed,
        tol: args.tol,
    };
    let cal = calibrate(&request)?;
    println!("channel={}", args.channel);
    println!("n_ref={}", request.n_ref);
    println!("target_mean={}", report::fmt_f64(target));
    println!(
        "{}={}",
        args.channel.parameter_name(),
        report::fmt_f64(cal.parameter)
    );
    println!("achieved_mean={}", report::fmt_f64(cal.achieved_mean));
    println!(
        "method={}",
        serde_json::to_value(cal.method)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default()
    );
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let mut opts = VerifyOptions {
        max_n: args.max_n,
        states: args.states,
        seed: args.seed,
        ..VerifyOptions::default()
    };
    if args.corrupt_kraus {
        opts.source = KrausSource {
            bath: corrupted_bath_kraus,
            ..KrausSource::default()
        };
    }
    let report = run_verification(&opts)?;
    println!("{:<42} {:>12} {:>10}  result", "check", "max dev", "tol");
    for c in &report.checks {
        println!(
            "{:<42} {:>12.3e} {:>10.0e}  {}",
            c.name,
            c.max_deviation,
            c.tolerance,
            if c.passed { "PASS" } else { "FAIL" }
        );
    }
    match report.first_failure() {
        Some(c) => Err(CliError::Verify(c.name.clone())),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Calibrate(a) => cmd_calibrate(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Reproduce(a) => cmd_reproduce(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qubit_lists() {
        assert_eq!(parse_qubits("2-6").unwrap().0, vec![2, 3, 4, 5, 6]);
        assert_eq!(parse_qubits("1,3").unwrap().0, vec![1, 3]);
        assert_eq!(parse_qubits("2-3,8").unwrap().0, vec![2, 3, 8]);
        assert!(parse_qubits("6-2").is_err());
        assert!(parse_qubits("x").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
