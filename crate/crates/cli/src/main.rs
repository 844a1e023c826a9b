use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fairalloc::notions::Notion;
use fairalloc::Limits;
use fairalloc_cli::commands::{self, Options, Outcome};
use fairalloc_cli::output::Format;
use fairalloc_cli::{parse_instance, CliResult};

#[derive(Parser)]
#[command(name = "fairalloc", version, about = "Fair allocation of goods among agents with entitlements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output as readable text or as tab-separated key=value records.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    /// Largest number of allocations (and of selection candidates) a search may visit.
    #[arg(long, global = true)]
    bound: Option<u128>,
    /// Tolerance for values that are not exact rationals.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tolerance: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Machine,
}

#[derive(Subcommand)]
enum Command {
    /// Print every agent's shares, or one share with --notion.
    Shares {
        file: PathBuf,
        #[arg(long, value_parser = notion)]
        notion: Option<Notion>,
    },
    /// Decide whether an allocation is acceptable; exits 1 if it is not.
    Check {
        file: PathBuf,
        /// `({e1},{e2,e3},{})` for items, `(0.3, 0.2, 0.5)` for one good.
        allocation: String,
        #[arg(long, value_parser = notion)]
        notion: Notion,
    },
    /// List the acceptable allocations (cells for one good).
    Enumerate {
        file: PathBuf,
        #[arg(long, value_parser = notion)]
        notion: Notion,
        /// Only members no other member Pareto dominates.
        #[arg(long)]
        pareto_front: bool,
    },
    /// Monotonicity of a family of entitlement vectors over one instance.
    Paradox {
        /// A file with `instance = "..."` and a `[family]` table.
        file: PathBuf,
        #[arg(long, value_parser = notion)]
        notion: Option<Notion>,
    },
    /// Recompute the reproduction corpus; exits 1 on any mismatch.
    Reproduce {
        /// Only cases whose name or source contains this text.
        selector: Option<String>,
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
}

fn notion(s: &str) -> Result<Notion, String> {
    s.parse().map_err(|e: fairalloc::Error| e.to_string())
}

fn run(cli: &Cli) -> CliResult<Outcome> {
    let mut limits = Limits::default();
    if let Some(b) = cli.bound {
        limits.enumeration = b;
        limits.selection = b;
    }
    let opts = Options { limits, tolerance: cli.tolerance };
    match &cli.command {
        Command::Shares { file, notion } => commands::shares(&parse_instance(file)?, *notion, &opts),
        Command::Check { file, allocation, notion } => commands::check(&parse_instance(file)?, *notion, allocation, &opts),
        Command::Enumerate { file, notion, pareto_front } => {
            commands::enumerate(&parse_instance(file)?, *notion, *pareto_front, &opts)
        }
        Command::Paradox { file, notion } => commands::paradox(file, *notion, &opts),
        Command::Reproduce { selector, corpus } => {
            let dir = corpus.clone().unwrap_or_else(commands::default_corpus);
            commands::reproduce(&dir, selector.as_deref(), &opts)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = match cli.format {
        OutputFormat::Text => Format::Text,
        OutputFormat::Machine => Format::Machine,
    };
    match run(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.report.render(format));
            ExitCode::from(outcome.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
