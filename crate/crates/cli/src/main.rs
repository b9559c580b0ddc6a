//! `socioverse`: plan, run, and score questionnaire-based social simulations.
//!
//! The binary wraps the simulation library in a pipeline-shaped CLI:
//!
//! - `pool` — ingest, clean, and summarize user pools;
//! - `synth` — marginal fitting, joint sampling, and income draws;
//! - `scenario` — validate configs and compile seeded plans;
//! - `run` / `evaluate` — execute a plan, score the results;
//! - `pipeline` — all of the above into one timestamped run directory;
//! - `fixtures` — regenerate the bundled demo data.
//!
//! Every subcommand honors `--json` (exactly one JSON document on stdout)
//! and the setting precedence: command-line flag, then environment variable,
//! then project config file, then built-in default. Usage errors exit with
//! status 2 (clap's convention); runtime failures exit with status 1.

mod commands;
mod output;
mod project;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{evaluate, fixtures, pipeline, pool, run, scenario, synth};
use project::load_project;

/// Persona-grounded social simulation: build agent populations from a real
/// user pool, run questionnaire scenarios against pluggable backends, and
/// score the outcomes against ground truth.
#[derive(Debug, Parser)]
#[command(name = "socioverse", version, propagate_version = true)]
struct Cli {
    /// Print machine-readable JSON instead of human-readable text.
    #[arg(long, global = true)]
    json: bool,
    /// Project config file (default: $SOCIOVERSE_CONFIG, then ./socioverse.json).
    #[arg(long, global = true, value_name = "FILE")]
    project: Option<PathBuf>,
    /// Suppress progress output on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ingest, clean, and summarize user pools.
    #[command(subcommand)]
    Pool(pool::PoolCmd),
    /// Population synthesis: marginal fitting, sampling, income draws.
    #[command(subcommand)]
    Synth(synth::SynthCmd),
    /// Validate scenario configs and compile simulation plans.
    #[command(subcommand)]
    Scenario(scenario::ScenarioCmd),
    /// Execute a simulation plan against an agent backend.
    Run(run::RunArgs),
    /// Score run results against ground truth.
    Evaluate(evaluate::EvaluateArgs),
    /// Plan, run, and evaluate a scenario in one timestamped run directory.
    Pipeline(pipeline::PipelineArgs),
    /// Regenerate the bundled demo fixture tree.
    Fixtures(fixtures::FixturesArgs),
    /// Print version information.
    Version,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: &Cli) -> anyhow::Result<()> {
    let project = load_project(cli.project.as_deref())?;
    let quiet = cli.quiet || project.quiet();
    match &cli.command {
        Command::Pool(cmd) => pool::run(cmd, cli.json),
        Command::Synth(cmd) => synth::run(cmd, cli.json),
        Command::Scenario(cmd) => scenario::run(cmd, &project, cli.json, quiet),
        Command::Run(args) => run::run(args, &project, cli.json, quiet),
        Command::Evaluate(args) => evaluate::run(args, cli.json),
        Command::Pipeline(args) => pipeline::run(args, &project, cli.json, quiet),
        Command::Fixtures(args) => fixtures::run(args, cli.json),
        Command::Version => version(cli.json),
    }
}

fn version(json: bool) -> anyhow::Result<()> {
    if json {
        output::print_json(&serde_json::json!({
            "name": "socioverse",
            "version": env!("CARGO_PKG_VERSION"),
        }))
    } else {
        println!("socioverse {}", env!("CARGO_PKG_VERSION"));
        Ok(())
    }
}
