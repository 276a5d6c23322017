//! `twoquery`: generate instances, solve them, run the two-query mechanisms,
//! and measure distortion.

mod analysis;
mod config;
mod failure;
mod files;
mod gen;
mod report;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use twoquery::mechanisms::MechanismKind;
use twoquery::sra::SrsMode;

use config::ExperimentConfig;
use failure::{CliResult, Failure};

#[derive(Parser)]
#[command(name = "twoquery", version, about = "Two-query mechanisms, exact optimizers and distortion experiments")]
struct Cli {
    /// TOML file whose keys supply defaults for flags; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write generated instances.
    Gen(GenArgs),
    /// Solve an instance exactly.
    Solve(SolveArgs),
    /// Run a mechanism on instance files, or sweep generated instances into a CSV.
    Run(RunArgs),
    /// Serial dictatorship and representative sets.
    Sra {
        #[command(subcommand)]
        action: SraAction,
    },
    /// Worst consistent completion against a mechanism's queries.
    Adversary(AdversaryArgs),
    /// Check assignment, budget and guarantee properties; exit 3 on any violation.
    Verify(VerifyArgs),
    /// Aggregate distortion CSVs.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Construction {
    Random,
    Theorem5,
    SrsImpossible,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MechanismArg {
    Match2q,
    General2q,
    Sc2q,
    Top2,
}

impl From<MechanismArg> for MechanismKind {
    fn from(m: MechanismArg) -> Self {
        match m {
            MechanismArg::Match2q => MechanismKind::Match2q,
            MechanismArg::General2q => MechanismKind::General2q,
            MechanismArg::Sc2q => MechanismKind::Sc2q,
            MechanismArg::Top2 => MechanismKind::Top2,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MeasureArg {
    Realized,
    Adversarial,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SrsArg {
    Exact,
    Greedy,
    TopChoices,
    Auto,
}

impl From<SrsArg> for SrsMode {
    fn from(s: SrsArg) -> Self {
        match s {
            SrsArg::Exact => SrsMode::Exact,
            SrsArg::Greedy => SrsMode::Greedy,
            SrsArg::TopChoices => SrsMode::TopChoices,
            SrsArg::Auto => SrsMode::Auto,
        }
    }
}

/// Parses a configured string with a flag's value parser.
pub fn parse_value<T: ValueEnum>(value: &str, key: &str) -> CliResult<T> {
    T::from_str(value, true).map_err(|_| Failure::param(format!("invalid value `{value}` for `{key}`")))
}

/// Flag value, else the configured string parsed the same way.
pub fn pick_enum<T: ValueEnum + Clone>(flag: Option<T>, configured: &Option<String>, key: &str) -> CliResult<Option<T>> {
    match (flag, configured) {
        (Some(v), _) => Ok(Some(v)),
        (None, Some(s)) => parse_value(s, key).map(Some),
        (None, None) => Ok(None),
    }
}

#[derive(Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    construction: Option<Construction>,
    /// Problem kind for random instances (e.g. one-sided, general, social-choice).
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    lambda: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Symmetric graph values, `v_u(v) = v_v(u)`.
    #[arg(long)]
    symmetric: bool,
    /// Also write each instance's derived ordinal profile.
    #[arg(long)]
    emit_ordinal: bool,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    allow_large: bool,
}

#[derive(Args)]
pub struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Family to optimize over; defaults to the instance's kind.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    /// Enumerate maximal family members instead of using the exact solver.
    #[arg(long)]
    brute: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    mechanism: Option<MechanismArg>,
    /// Instance files or directories; omit to sweep generated instances.
    #[arg(long, num_args = 1..)]
    instance: Vec<PathBuf>,
    /// Ordinal profile to use instead of the derived one (single instance).
    #[arg(long)]
    ordinal: Option<PathBuf>,
    /// Family of the instance; must agree with its kind.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum)]
    srs_mode: Option<SrsArg>,
    /// Queries per agent.
    #[arg(long)]
    budget: Option<usize>,
    /// Output file (one instance) or directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sweep: instance source.
    #[arg(long, value_enum)]
    construction: Option<Construction>,
    /// Sweep: problem kind of random instances.
    #[arg(long)]
    kind: Option<String>,
    /// Sweep: sizes (n for random instances, m for layered ones).
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    /// Sweep: alternatives of random social choice instances (default n).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    lambda: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    measure: Option<MeasureArg>,
    /// Sweep: mechanism used when the social choice mechanism finds no representative set.
    #[arg(long, value_enum)]
    fallback: Option<MechanismArg>,
    #[arg(long)]
    tolerance: Option<f64>,
    /// Sweep: CSV output path.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Sweep: worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    allow_large: bool,
}

#[derive(Subcommand)]
enum SraAction {
    /// Build (or load) an assignment or representative set and check it.
    Verify(SraArgs),
}

#[derive(Args)]
pub struct SraArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    ordinal: Option<PathBuf>,
    /// Degree bound of the rival subgraphs; defaults to the family's.
    #[arg(long)]
    k_eff: Option<usize>,
    /// Assignment JSON to check instead of running the serial dictatorship.
    #[arg(long)]
    assignment: Option<PathBuf>,
    /// Seed for a random pick order (index order otherwise).
    #[arg(long)]
    order_seed: Option<u64>,
    #[arg(long, value_enum)]
    srs_mode: Option<SrsArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct AdversaryArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Mechanism run JSON, or a bare transcript together with --solution/--winner.
    #[arg(long)]
    transcript: PathBuf,
    /// Subgraph JSON of the mechanism's output.
    #[arg(long, conflicts_with = "winner")]
    solution: Option<PathBuf>,
    /// Winning alternative of the mechanism.
    #[arg(long)]
    winner: Option<usize>,
    #[arg(long)]
    ordinal: Option<PathBuf>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Instance files or directories.
    #[arg(long, num_args = 1.., required = true)]
    instance: Vec<PathBuf>,
    #[arg(long, value_enum)]
    srs_mode: Option<SrsArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ReportArgs {
    /// Distortion CSVs written by `run`.
    #[arg(long, num_args = 1.., required = true)]
    input: Vec<PathBuf>,
    /// Summary CSV (stdout otherwise).
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV of fitted log-log slopes.
    #[arg(long)]
    fit: Option<PathBuf>,
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let cfg = ExperimentConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Gen(args) => gen::cmd_gen(args, &cfg),
        Command::Solve(args) => analysis::cmd_solve(args),
        Command::Run(args) => run::cmd_run(args, &cfg),
        Command::Sra { action: SraAction::Verify(args) } => analysis::cmd_sra(args, &cfg),
        Command::Adversary(args) => analysis::cmd_adversary(args, &cfg),
        Command::Verify(args) => analysis::cmd_verify(args, &cfg),
        Command::Report(args) => report::cmd_report(args),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
