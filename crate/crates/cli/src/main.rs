//! `promptcat`: law checks and the meta-prompting pipeline from the shell.
//!
//! Exit codes: 0 success, 1 law or check failure, 2 input or configuration
//! error, 3 replay cache miss.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use promptcat::harness::{Aggregation, WilcoxonMode};

use config::{RunArgs, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Check(String),
    #[error("{0}")]
    Input(String),
    #[error("{} replay cache miss(es): {}", .0.len(), abbreviate(.0))]
    CacheMiss(Vec<String>),
}

fn abbreviate(keys: &[String]) -> String {
    const SHOWN: usize = 5;
    let mut s = keys
        .iter()
        .take(SHOWN)
        .map(|k| &k[..k.len().min(12)])
        .collect::<Vec<_>>()
        .join(", ");
    if keys.len() > SHOWN {
        s.push_str(&format!(" and {} more", keys.len() - SHOWN));
    }
    s
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Check(_) => 1,
            CliError::Input(_) => 2,
            CliError::CacheMiss(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "promptcat",
    version,
    about = "Law-checked prompt composition and meta-prompting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AggregationArg {
    Independent,
    PerItemMedian,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Auto,
    Exact,
    Normal,
}

#[derive(Subcommand)]
enum Command {
    /// Check category, monoidal and task laws on a fixture.
    Laws {
        fixture: PathBuf,
        /// Directory for `laws.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample a corpus, generate prompts, execute them and write a pack.
    Metagen(RunArgs),
    /// Execute previously generated prompts.
    Execute {
        #[arg(long)]
        generated: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Build an annotation pack from previously generated prompts.
    Pack {
        #[arg(long)]
        generated: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Rank statistics and significance tests for a pack's rankings.
    Analyze {
        #[arg(long)]
        pack: PathBuf,
        #[arg(long)]
        rankings: PathBuf,
        #[arg(long, default_value = "report")]
        out: PathBuf,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, value_enum, default_value = "independent")]
        aggregation: AggregationArg,
        #[arg(long, value_enum, default_value = "auto")]
        wilcoxon: ModeArg,
    },
    /// Run the metagen pipeline while recording every call into the replay cache.
    Record(RunArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Laws { fixture, out } => commands::laws(&fixture, out.as_deref()),
        Command::Metagen(args) => commands::metagen(&RunConfig::resolve(&args)?, false),
        Command::Record(args) => commands::metagen(&RunConfig::resolve(&args)?, true),
        Command::Execute { generated, run } => {
            commands::execute(&RunConfig::resolve(&run)?, &generated)
        }
        Command::Pack { generated, run } => commands::pack(&RunConfig::resolve(&run)?, &generated),
        Command::Analyze {
            pack,
            rankings,
            out,
            k,
            aggregation,
            wilcoxon,
        } => commands::analyze_cmd(&commands::AnalyzeArgs {
            pack,
            rankings,
            out,
            k,
            aggregation: match aggregation {
                AggregationArg::Independent => Aggregation::Independent,
                AggregationArg::PerItemMedian => Aggregation::PerItemMedian,
            },
            mode: match wilcoxon {
                ModeArg::Auto => WilcoxonMode::Auto,
                ModeArg::Exact => WilcoxonMode::Exact,
                ModeArg::Normal => WilcoxonMode::Normal,
            },
        }),
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
