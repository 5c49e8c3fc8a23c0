//! `cvtele`: single runs, (q, r) sweeps and the verification suite.

mod render;

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cvtele::sweep::{self, MetricSelection, NuSource, SweepGrid};
use cvtele::{teleport, verification, GainConvention, ProtocolConfig};

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "cvtele", version, about = "Teleportation of two-mode squeezed states at the covariance-matrix level")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Teleport one configuration and print the full report.
    Run(RunArgs),
    /// Evaluate a (q, r) grid and write CSV.
    Sweep(SweepArgs),
    /// Run the verification suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Convention {
    AsPrinted,
    GainCorrected,
}

impl From<Convention> for GainConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::AsPrinted => GainConvention::AsPrinted,
            Convention::GainCorrected => GainConvention::GainCorrected,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Metric {
    En,
    Fidelity,
    Both,
}

impl From<Metric> for MetricSelection {
    fn from(m: Metric) -> Self {
        match m {
            Metric::En => MetricSelection::En,
            Metric::Fidelity => MetricSelection::Fidelity,
            Metric::Both => MetricSelection::Both,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NuFrom {
    Pipeline,
    ClosedForm,
}

impl From<NuFrom> for NuSource {
    fn from(n: NuFrom) -> Self {
        match n {
            NuFrom::Pipeline => NuSource::Pipeline,
            NuFrom::ClosedForm => NuSource::ClosedForm,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Text,
    Machine,
}

#[derive(Args, Debug)]
struct Phases {
    /// Source phase η in radians.
    #[arg(long, default_value_t = FRAC_PI_4, allow_negative_numbers = true)]
    eta: f64,
    /// Amplifier phase φ in radians.
    #[arg(long, default_value_t = FRAC_PI_8, allow_negative_numbers = true)]
    phi: f64,
    #[arg(long, value_enum, default_value_t = Convention::AsPrinted)]
    convention: Convention,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Source squeezing.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    q: f64,
    /// Amplifier squeezing.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    r: f64,
    #[command(flatten)]
    phases: Phases,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    q_min: f64,
    #[arg(long, default_value_t = sweep::DEFAULT_MAX, allow_negative_numbers = true)]
    q_max: f64,
    #[arg(long, default_value_t = sweep::DEFAULT_STEPS)]
    q_steps: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    r_min: f64,
    #[arg(long, default_value_t = sweep::DEFAULT_MAX, allow_negative_numbers = true)]
    r_max: f64,
    #[arg(long, default_value_t = sweep::DEFAULT_STEPS)]
    r_steps: usize,
    #[command(flatten)]
    phases: Phases,
    /// Metric columns to fill; the others are left empty.
    #[arg(long, value_enum, default_value_t = Metric::Both)]
    metric: Metric,
    /// Source of ν̃₋ and E_N.
    #[arg(long, value_enum, default_value_t = NuFrom::Pipeline)]
    nu_source: NuFrom,
    /// Worker threads (0 = rayon default).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// CSV destination; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(PathBuf, io::Error),
}

impl From<cvtele::Error> for Failure {
    fn from(e: cvtele::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Io(path, e)) => {
            eprintln!("error: {}: {e}", path.display());
            ExitCode::from(EXIT_IO)
        }
    }
}

fn emit(out: Option<&Path>, body: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| Failure::Io(path.to_path_buf(), e))?;
            let mut w = BufWriter::new(file);
            w.write_all(body.as_bytes())
                .and_then(|_| w.flush())
                .map_err(|e| Failure::Io(path.to_path_buf(), e))
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Io(PathBuf::from("<stdout>"), e))
        }
    }
}

fn machine<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn cmd_run(args: RunArgs) -> Result<ExitCode, Failure> {
    let config = ProtocolConfig::new(
        args.q,
        args.phases.eta,
        args.r,
        args.phases.phi,
        args.phases.convention.into(),
    )?;
    let report = teleport(&config)?;
    let body = match args.format {
        Format::Text => render::report(&report),
        Format::Machine => machine(&report),
    };
    emit(args.out.as_deref(), &body)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode, Failure> {
    let grid = SweepGrid {
        q_min: args.q_min,
        q_max: args.q_max,
        q_steps: args.q_steps,
        r_min: args.r_min,
        r_max: args.r_max,
        r_steps: args.r_steps,
        eta: args.phases.eta,
        phi: args.phases.phi,
        convention: args.phases.convention.into(),
    };
    grid.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let rows = pool.install(|| sweep::run(&grid, args.metric.into(), args.nu_source.into()))?;
    emit(args.out.as_deref(), &sweep::to_csv(&rows))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, Failure> {
    let report = verification::run_suite();
    let body = match args.format {
        Format::Text => format!("{report}\n"),
        Format::Machine => machine(&report),
    };
    emit(args.out.as_deref(), &body)?;
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY_FAILED)
    })
}
