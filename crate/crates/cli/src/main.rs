//! Batch front-end for the postulatelab library: named scenarios, config
//! files, and machine-readable reports.
//!
//! Exit status: 0 when every requested check passes its tolerance,
//! 1 when a violation is found, 2 for usage/config/resource errors.

mod report;
mod runner;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use report::OutputFormat;
use runner::CommandConfig;

const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(
    name = "postulatelab",
    version,
    about = "Simulates post-quantum readout devices and checks the consistency \
             constraints of alternative measurement rules",
    after_help = "CSV columns by command:\n\
                  \x20 check-axioms   axiom,violation\n\
                  \x20 no-signalling  check,violation\n\
                  \x20 signalling     outcome,baseline,post\n\
                  \x20 spo            j,i,probability   (plus residual rows)\n\
                  \x20 fpem           bin,probability\n\
                  \x20 span-rank      n,rank\n\
                  \x20 space-dims     key,value"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for all randomness (falls back to POSTULATELAB_SEED, then 42)
    #[arg(long, global = true, env = "POSTULATELAB_SEED")]
    seed: Option<u64>,

    /// Worker threads (1 guarantees determinism; reports record the count)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Report format
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Run the eight-axiom battery against a composition rule
    CheckAxioms(runner::CheckAxiomsArgs),
    /// Measure only the no-signalling violation of a composition rule
    NoSignalling(runner::NoSignallingArgs),
    /// Compare device statistics before/after a remote measurement
    Signalling(runner::SignallingArgs),
    /// Sequential readout-then-POVM statistics and the quadratic-form fit
    Spo(runner::SpoArgs),
    /// Entropy-meter bin distribution for a two-qubit preparation
    Fpem(runner::FpemArgs),
    /// Numerical-rank profile of an outcome-function family
    SpanRank(runner::SpanRankArgs),
    /// State-cloud and effect-span dimensions of an outcome family
    SpaceDims(runner::SpaceDimsArgs),
    /// Execute a named scenario or a JSON config file
    Run(RunArgs),
    /// List the built-in scenarios
    ListScenarios,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Scenario id from `list-scenarios`
    scenario: Option<String>,

    /// JSON config file: {"command": "...", ...params, "seed": n}
    #[arg(long, conflicts_with = "scenario")]
    config: Option<PathBuf>,
}

fn init_threads(threads: Option<usize>) -> usize {
    #[cfg(feature = "parallel")]
    {
        if let Some(n) = threads {
            // ignore the error when a pool already exists (tests)
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = init_threads(cli.threads);
    let mut seed = cli.seed.unwrap_or(DEFAULT_SEED);

    let (config, command_name): (CommandConfig, &'static str) = match cli.command {
        Command::CheckAxioms(args) => (CommandConfig::CheckAxioms(args), "check-axioms"),
        Command::NoSignalling(args) => (CommandConfig::NoSignalling(args), "no-signalling"),
        Command::Signalling(args) => (CommandConfig::Signalling(args), "signalling"),
        Command::Spo(args) => (CommandConfig::Spo(args), "spo"),
        Command::Fpem(args) => (CommandConfig::Fpem(args), "fpem"),
        Command::SpanRank(args) => (CommandConfig::SpanRank(args), "span-rank"),
        Command::SpaceDims(args) => (CommandConfig::SpaceDims(args), "space-dims"),
        Command::ListScenarios => {
            print!("{}", scenarios::catalog_text());
            return ExitCode::SUCCESS;
        }
        Command::Run(args) => match resolve_run(args, cli.seed, &mut seed) {
            Ok(pair) => pair,
            Err(err) => {
                eprintln!("error: {err:#}");
                return ExitCode::from(2);
            }
        },
    };

    match runner::execute(&config, seed, threads, command_name) {
        Ok(outcome) => {
            if let Err(err) = report::emit(&outcome, cli.format, cli.out.as_deref()) {
                eprintln!("error: {err:#}");
                return ExitCode::from(2);
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

/// Resolves `run <scenario>` / `run --config file` to a command config.
/// Seed precedence: --seed flag, then config-file seed, then default.
fn resolve_run(
    args: RunArgs,
    flag_seed: Option<u64>,
    seed: &mut u64,
) -> anyhow::Result<(CommandConfig, &'static str)> {
    if let Some(path) = args.config {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        let file: runner::ConfigFile = serde_json::from_str(&text)
            .map_err(|e| anyhow::anyhow!("invalid config {}: {e}", path.display()))?;
        if flag_seed.is_none() {
            if let Some(s) = file.seed {
                *seed = s;
            }
        }
        let config = runner::from_config(&file)?;
        let name = config.name();
        return Ok((config, name));
    }
    let id = args
        .scenario
        .ok_or_else(|| anyhow::anyhow!("provide a scenario id or --config FILE"))?;
    let preset = scenarios::lookup(&id)
        .ok_or_else(|| anyhow::anyhow!("unknown scenario '{id}'; see list-scenarios"))?;
    if flag_seed.is_none() {
        *seed = preset.seed;
    }
    let name = preset.command.name();
    Ok((preset.command, name))
}
