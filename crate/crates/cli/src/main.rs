//! `qnormal`: build the diagonal basic sequence, verify its witnesses, and
//! inspect Cantor expansions and orbits.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_rational::BigRational;

use qnormal::cantor::{parse_rational, BasicSequence};
use qnormal::config::{load_oracle, load_registry};
use qnormal::construction::{
    basic_sequence_from, limit_function_within, pow3, DEFAULT_STAGE_LIMIT,
};
use qnormal::programs::Registry;
use qnormal::Error;

mod commands;
mod output;

/// Exit statuses.
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_RESOURCE: u8 = 2;
pub const EXIT_WITNESS: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "qnormal",
    version,
    about = "Diagonal basic sequences against registered computable reals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build f and Q from a registry and write the table.
    Build(BuildArgs),
    /// Run the non-normality witness for every index below the stage count.
    Verify(VerifyArgs),
    /// Cantor series digits of a rational.
    Expand(SeriesArgs),
    /// Orbit x, q_0 x, q_0 q_1 x, ... mod 1 of a rational.
    Orbit(SeriesArgs),
    /// Interval frequencies and star discrepancy of an orbit.
    Discrepancy(DiscrepancyArgs),
    /// Digits of the Champernowne sequence.
    Champernowne(ChampernowneArgs),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RegistryArgs {
    /// Registry file (TOML).
    #[arg(long)]
    pub registry: PathBuf,
    /// Oracle bit-prefix file; replaces any [oracle] table in the registry.
    #[arg(long)]
    pub oracle: Option<PathBuf>,
}

impl RegistryArgs {
    pub fn load(&self) -> Result<Registry, Error> {
        let oracle = self.oracle.as_deref().map(load_oracle).transpose()?;
        load_registry(&self.registry, oracle)
    }
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub registry: RegistryArgs,
    /// Stage budget S; the table covers positions below 3^S.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub stages: u32,
    /// Largest position to emit (default 3^S - 1).
    #[arg(long)]
    pub max_pos: Option<u64>,
    /// Include, per position, the stages at which f_s changed.
    #[arg(long)]
    pub trace: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub registry: RegistryArgs,
    /// Stage budget S; witnesses run for indices below S.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub stages: u32,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Where a basic sequence comes from: an explicit list or a construction.
#[derive(Debug, Args)]
pub struct BasesArgs {
    /// Comma-separated bases q_0,q_1,... (each >= 2).
    #[arg(long, value_delimiter = ',', conflicts_with = "registry")]
    pub bases: Option<Vec<BigUint>>,
    /// Use the Q constructed from this registry.
    #[arg(long)]
    pub registry: Option<PathBuf>,
    /// Oracle file for the registry.
    #[arg(long, requires = "registry")]
    pub oracle: Option<PathBuf>,
    /// Stage budget for the construction.
    #[arg(long)]
    pub stages: Option<u32>,
}

impl BasesArgs {
    /// A basic sequence with at least `count` terms.
    pub fn resolve(&self, count: usize) -> Result<BasicSequence, Error> {
        match (&self.bases, &self.registry) {
            (Some(bases), _) => {
                let q = BasicSequence::new(bases.clone())?;
                if q.len() < count {
                    return Err(Error::Config(format!(
                        "{count} bases needed, {} given",
                        q.len()
                    )));
                }
                Ok(q)
            }
            (None, Some(path)) => {
                let registry = RegistryArgs {
                    registry: path.clone(),
                    oracle: self.oracle.clone(),
                }
                .load()?;
                let f = limit_function_within(&registry, count as u64, self.stage_limit())?;
                basic_sequence_from(&f, count)
            }
            (None, None) => Err(Error::Config(
                "give either --bases or --registry for the basic sequence".into(),
            )),
        }
    }

    pub fn stage_limit(&self) -> usize {
        self.stages.map_or(DEFAULT_STAGE_LIMIT, |s| s as usize)
    }
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    /// Rational in [0, 1), e.g. 5/6.
    #[arg(long, value_parser = parse_unit)]
    pub x: BigRational,
    /// Number of digits / orbit steps.
    #[arg(short = 'n', long)]
    pub n: usize,
    #[command(flatten)]
    pub bases: BasesArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DiscrepancyArgs {
    /// Rational starting point in [0, 1).
    #[arg(long, value_parser = parse_unit, conflicts_with = "program", required_unless_present = "program")]
    pub x: Option<BigRational>,
    /// Index of a registered program whose real is the starting point
    /// (requires --registry; Q is then the constructed sequence).
    #[arg(long)]
    pub program: Option<usize>,
    /// Number of orbit points.
    #[arg(short = 'n', long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[command(flatten)]
    pub bases: BasesArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ChampernowneArgs {
    #[arg(long, default_value_t = 2)]
    pub base: u32,
    #[arg(short = 'n', long)]
    pub n: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_unit(s: &str) -> Result<BigRational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

/// Failure of a command, carrying its exit status.
#[derive(Debug)]
pub enum Failure {
    Lib(Error),
    Io(std::io::Error),
    WitnessFailed(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Lib(Error::ResourceLimit { .. }) => EXIT_RESOURCE,
            Self::WitnessFailed(_) => EXIT_WITNESS,
            _ => EXIT_CONFIG,
        }
    }

    fn message(&self) -> String {
        match self {
            Self::Lib(Error::ResourceLimit { required, limit }) => format!(
                "resource limit: {required} stages required (3^{required} = {} positions) but the budget is {limit}",
                pow3(*required).map_or_else(|| "overflow".to_string(), |v| v.to_string())
            ),
            Self::Lib(e) => e.to_string(),
            Self::Io(e) => format!("i/o error: {e}"),
            Self::WitnessFailed(msg) => format!("witness failure: {msg}"),
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Build(args) => commands::build(&args),
        Command::Verify(args) => commands::verify(&args),
        Command::Expand(args) => commands::expand(&args),
        Command::Orbit(args) => commands::orbit(&args),
        Command::Discrepancy(args) => commands::discrepancy(&args),
        Command::Champernowne(args) => commands::champernowne(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("qnormal: {}", failure.message());
            ExitCode::from(failure.exit_code())
        }
    }
}

/// Positions covered by `stages` stages, for error messages and defaults.
pub fn domain_end(stages: usize) -> Result<u64, Error> {
    pow3(stages).map(|v| v - 1).ok_or(Error::ResourceLimit {
        required: stages,
        limit: qnormal::construction::MAX_STAGES,
    })
}
