mod commands;
mod table;
mod verify;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use passcount::exact::SeriesDepth;
use serde_json::json;

use table::{Format, Row};

/// Used when `--seed` is not given; `--seed random` draws a fresh one.
pub const DEFAULT_SEED: u64 = 0x5EED_B0B5;

#[derive(Parser, Debug)]
#[command(
    name = "passcount",
    version,
    about = "Pass-count and first-collision laws: exact, asymptotic and simulated"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, value_enum, default_value = "json", global = true)]
    output: Format,
    /// Write the table here instead of standard output.
    #[arg(long, global = true)]
    output_path: Option<PathBuf>,
    /// Check built-in tolerances and exit with status 1 if any fails.
    #[arg(long, global = true)]
    assert: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact laws and cross-estimates in double-double precision.
    Exact {
        #[arg(value_enum)]
        target: ExactTarget,
        #[command(flatten)]
        params: Params,
    },
    /// Asymptotic expansions, with exact counterparts where tractable.
    Approx {
        #[arg(value_enum)]
        target: ApproxTarget,
        #[command(flatten)]
        params: Params,
    },
    /// Seeded Monte Carlo runs.
    Simulate {
        #[arg(value_enum)]
        target: SimulateTarget,
        #[command(flatten)]
        params: Params,
    },
    /// Run the built-in claim suites.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: verify::Suite,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExactTarget {
    CollisionSf,
    PassCdf,
    Series,
    Sandwich,
    Relerr,
    OptimalShift,
    Moments,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ApproxTarget {
    Varrho,
    Cdf,
    Pmf,
    Moments,
    Charfn,
    Stats,
    OptDeltas,
    EmCheck,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SimulateTarget {
    Law,
    Delta,
    Opcounts,
}

#[derive(Args, Debug, Clone)]
pub struct Params {
    /// Year length or sequence length; accepts forms like 1e4.
    #[arg(long, value_parser = parse_real)]
    pub n: Option<f64>,
    #[arg(long)]
    pub m: Option<u64>,
    /// Moment order.
    #[arg(long)]
    pub k: Option<u32>,
    /// Standardized pass-law argument.
    #[arg(long, allow_negative_numbers = true)]
    pub x: Option<f64>,
    /// Standardized collision-law argument.
    #[arg(long, allow_negative_numbers = true)]
    pub z: Option<f64>,
    /// Characteristic-function argument.
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Integer seed (decimal or 0x-prefixed hex), or `random`.
    #[arg(long, value_parser = parse_seed, default_value = "0x5EED_B0B5")]
    pub seed: u64,
    /// Series depth: a term count or `auto`.
    #[arg(long, value_parser = parse_depth)]
    pub depth: Option<SeriesDepth>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// pass | collision for laws, birthday | inversion for families.
    #[arg(long)]
    pub kind: Option<String>,
}

fn parse_real(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|e| format!("{e}"))?;
    if !v.is_finite() {
        return Err("must be finite".into());
    }
    Ok(v)
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let t = s.trim().replace('_', "");
    if t.eq_ignore_ascii_case("random") {
        return Ok(rand::random());
    }
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse(),
    };
    parsed.map_err(|e| format!("{e}"))
}

fn parse_depth(s: &str) -> Result<SeriesDepth, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(SeriesDepth::Auto);
    }
    s.parse().map(SeriesDepth::Fixed).map_err(|e| format!("{e}"))
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(passcount::Error),
    Io(io::Error),
}

impl From<passcount::Error> for CliError {
    fn from(e: passcount::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(passcount::Error::Resource(_)) | CliError::Io(_) => 3,
            _ => 2,
        }
    }

    fn kind(&self) -> &'static str {
        use passcount::Error as E;
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io(_) => "io",
            CliError::Lib(e) => match e {
                E::Domain(_) => "domain",
                E::Range(_) => "range",
                E::Resource(_) => "resource",
                E::DegenerateProbability(_) => "degenerate_probability",
                E::Singular(_) => "singular",
            },
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(s) => s.clone(),
            CliError::Lib(e) => e.to_string(),
            CliError::Io(e) => e.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Rows plus whether every checked tolerance held.
pub struct Outcome {
    pub rows: Vec<Row>,
    pub ok: bool,
}

fn run(cli: &Cli) -> CliResult<Outcome> {
    match &cli.command {
        Command::Exact { target, params } => commands::exact(*target, params).map(|rows| Outcome { rows, ok: true }),
        Command::Approx { target, params } => commands::approx(*target, params).map(|rows| Outcome { rows, ok: true }),
        Command::Simulate { target, params } => commands::simulate(*target, params, cli.assert),
        Command::Verify { suite } => Ok(verify::run(*suite)),
    }
}

fn report(err: &CliError) -> ExitCode {
    let code = err.exit_code();
    let doc = json!({
        "schema_version": table::SCHEMA_VERSION,
        "error": { "kind": err.kind(), "message": err.message() },
        "exit_code": code,
    });
    eprintln!("{doc}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return report(&CliError::Usage(e.render().to_string().trim().to_string())),
    };
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => return report(&e),
    };
    let written = match &cli.output_path {
        Some(path) => File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            table::emit(&outcome.rows, cli.output, &mut w)?;
            w.flush()
        }),
        None => {
            let mut lock = io::stdout().lock();
            table::emit(&outcome.rows, cli.output, &mut lock)
        }
    };
    if let Err(e) = written {
        return report(&CliError::Io(e));
    }
    if outcome.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
