use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use singlet_core::error::Error;
use singlet_core::io;
use singlet_core::scenario::{run_scenario, ScenarioConfig, ScenarioKind, DEFAULT_SEED};
use singlet_core::suppression::suppression_table;
use singlet_core::verify::{Level, Verifier};

/// Exact simulation of generalized-singlet distillation with Fourier multiports.
#[derive(Parser)]
#[command(name = "singlet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario through the distillation pipeline and write a report.
    Run(RunArgs),
    /// Print law verdicts for every output of the Fourier N-port.
    Suppress(SuppressArgs),
    /// Run the invariant suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Depolarized,
    Product,
    ShortcutPure,
    ShortcutMixed,
    Custom,
}

impl From<ScenarioArg> for ScenarioKind {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::Depolarized => ScenarioKind::Depolarized,
            ScenarioArg::Product => ScenarioKind::Product,
            ScenarioArg::ShortcutPure => ScenarioKind::ShortcutPure,
            ScenarioArg::ShortcutMixed => ScenarioKind::ShortcutMixed,
            ScenarioArg::Custom => ScenarioKind::Custom,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NoiseArg {
    RandomLocal,
    None,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PhasesArg {
    Random,
    None,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    scenario: ScenarioArg,
    /// Particle and mode number (shortcut scenarios: 3; custom: taken from the file).
    #[arg(long = "n", value_name = "N")]
    n: Option<usize>,
    /// State or ensemble JSON file for the custom scenario.
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    /// First multiport size (default 2, shortcut scenarios 3).
    #[arg(long)]
    start_j: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value = "none")]
    noise: NoiseArg,
    #[arg(long, value_enum, default_value = "none")]
    phases: PhasesArg,
    /// Unitary JSON file replacing a Fourier multiport; repeat once per step,
    /// in step order.
    #[arg(long = "unitary", value_name = "FILE")]
    unitaries: Vec<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Propagate ensemble components in parallel (same report).
    #[arg(long)]
    parallel: bool,
}

#[derive(Args)]
struct SuppressArgs {
    #[arg(long = "n", value_name = "N")]
    n: usize,
    /// Largest N accepted.
    #[arg(long, default_value_t = 5)]
    max_n: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "quick")]
    level: LevelArg,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

/// A failure with a message for standard error.
struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))
}

fn in_file(path: &Path) -> impl FnOnce(Error) -> Failure + '_ {
    move |e| Failure(format!("{}: {e}", path.display()))
}

/// Write to standard output; a reader that went away is not an error.
fn emit(text: &str) -> Result<(), Failure> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure(format!("cannot write output: {e}"))),
        _ => Ok(()),
    }
}

fn cmd_run(args: RunArgs) -> Result<ExitCode, Failure> {
    let mut config = ScenarioConfig::new(args.scenario.into());
    config.n = args.n;
    config.start_j = args.start_j;
    config.seed = args.seed;
    config.local_noise = args.noise == NoiseArg::RandomLocal;
    config.random_phases = args.phases == PhasesArg::Random;
    config.parallel = args.parallel;
    for path in &args.unitaries {
        config.multiports.push(io::unitary_from_json(&read(path)?).map_err(in_file(path))?);
    }
    let custom = match &args.input {
        Some(path) => Some(io::input_from_json(&read(path)?).map_err(in_file(path))?),
        None => None,
    };

    let report = run_scenario(&config, custom)?;
    let text = match args.format {
        Format::Json => io::report_to_json(&report),
        Format::Csv => io::report_to_csv(&report),
    };
    match &args.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure(format!("cannot write {}: {e}", path.display())))?,
        None => emit(&text)?,
    }
    if report.output.is_none() {
        eprintln!("protocol failed: success probability {:e}", report.success_probability);
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_suppress(args: SuppressArgs) -> Result<ExitCode, Failure> {
    if args.n < 2 || args.n > args.max_n {
        return Err(Failure(format!("N must be between 2 and {}, got {}", args.max_n, args.n)));
    }
    let cross_check = args.n <= 3;
    let table = suppression_table(args.n, cross_check)?;
    let lambdas: Vec<String> = table.lambdas.values().iter().map(|l| format_phase(l.arg())).collect();
    let mut text = format!("N = {}, output eigenvalues λ_k = exp(i·{})\n", args.n, lambdas.join(", "));
    text.push_str("class  eigenphase  output        verdict     max|amp|\n");
    for row in &table.rows {
        let amp = row.max_amplitude.map_or_else(|| "-".to_string(), |a| format!("{a:.3e}"));
        let counts: Vec<String> = row.output.counts().iter().map(usize::to_string).collect();
        text.push_str(&format!(
            "{:<6} {:<11} {:<13} {:<11} {}\n",
            row.class,
            format_phase(row.eigenvalue.arg()),
            format!("({})", counts.join(",")),
            if row.suppressed { "suppressed" } else { "allowed" },
            amp
        ));
    }
    emit(&text)?;
    let bad = table.violations(1e-10);
    if let Some(row) = bad.first() {
        return Err(Failure(format!(
            "class {} output {:?} is suppressed by the law but has amplitude {:e}",
            row.class,
            row.output.counts(),
            row.max_amplitude.unwrap_or(f64::NAN)
        )));
    }
    Ok(ExitCode::SUCCESS)
}

/// Phase as a multiple of π in `[0, 2)`.
fn format_phase(arg: f64) -> String {
    let x = (arg / std::f64::consts::PI).rem_euclid(2.0);
    let x = if (2.0 - x).abs() < 1e-9 { 0.0 } else { x };
    format!("{x:.4}π")
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, Failure> {
    let level = match args.level {
        LevelArg::Quick => Level::Quick,
        LevelArg::Full => Level::Full,
    };
    let outcomes = Verifier::new(level).with_seed(args.seed).run();
    let mut text = String::new();
    for o in &outcomes {
        match &o.failure {
            None => text.push_str(&format!("ok    {:<26} {:>8.1} ms\n", o.name, o.elapsed.as_secs_f64() * 1e3)),
            Some(why) => text.push_str(&format!("FAIL  {:<26} {why}\n", o.name)),
        }
    }
    emit(&text)?;
    match outcomes.iter().find(|o| !o.passed()) {
        Some(first) => Err(Failure(format!("invariant violated: {}", first.name))),
        None => Ok(ExitCode::SUCCESS),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Suppress(a) => cmd_suppress(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(code) => code,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
