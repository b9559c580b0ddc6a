//! `run` subcommand: execute a compiled plan against an agent backend.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;
use socioverse_core::behavior::{
    run_simulation, AgentBackend, HttpLlm, HttpLlmConfig, RuleOracle, RunManifest, RunOptions,
    RunOutput,
};
use socioverse_core::scenario::SimulationPlan;

use crate::commands::base_dir;
use crate::output;
use crate::project::{BackendKind, ProjectConfig};

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Simulation plan produced by `scenario plan`.
    #[arg(long, value_name = "FILE")]
    plan: PathBuf,
    /// Agent backend (default: project config, then oracle).
    #[arg(long, value_enum)]
    backend: Option<BackendKind>,
    /// Worker threads.
    #[arg(long)]
    concurrency: Option<usize>,
    /// Per-agent attempt budget for transient transport failures.
    #[arg(long)]
    max_attempts: Option<u32>,
    /// Initial retry backoff in milliseconds (doubles per retry).
    #[arg(long)]
    backoff_ms: Option<u64>,
    /// Safety check: must equal the seed embedded in the plan.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for results.jsonl and manifest.json (default: the plan's).
    #[arg(long, value_name = "DIR")]
    output_dir: Option<PathBuf>,
    /// Chat-completions endpoint (http backend only).
    #[arg(long, value_name = "URL")]
    endpoint: Option<String>,
    /// Model name (http backend only).
    #[arg(long, value_name = "NAME")]
    model: Option<String>,
}

/// Build the requested backend, layering flag > project config > defaults.
/// API keys are never taken from flags or files; the HTTP backend reads
/// `SOCIOVERSE_API_KEY` from the environment on its own.
pub fn make_backend(
    flag: Option<BackendKind>,
    project: &ProjectConfig,
    endpoint: Option<&str>,
    model: Option<&str>,
) -> Box<dyn AgentBackend> {
    let kind = flag.or(project.backend.kind).unwrap_or(BackendKind::Oracle);
    match kind {
        BackendKind::Oracle => Box::new(RuleOracle),
        BackendKind::Http => {
            let defaults = HttpLlmConfig::default();
            Box::new(HttpLlm::new(HttpLlmConfig {
                endpoint: endpoint
                    .map(str::to_string)
                    .or_else(|| project.backend.endpoint.clone())
                    .unwrap_or(defaults.endpoint),
                model: model
                    .map(str::to_string)
                    .or_else(|| project.backend.model.clone())
                    .unwrap_or(defaults.model),
                api_key: None,
                timeout_secs: project.backend.timeout_secs.unwrap_or(defaults.timeout_secs),
                rpm_limit: project.backend.rpm_limit.or(defaults.rpm_limit),
            }))
        }
    }
}

/// Effective run options, layering flag > project config > defaults.
pub fn run_options(
    project: &ProjectConfig,
    concurrency: Option<usize>,
    max_attempts: Option<u32>,
    backoff_ms: Option<u64>,
) -> RunOptions {
    let defaults = RunOptions::default();
    RunOptions {
        concurrency: concurrency
            .or(project.backend.concurrency)
            .unwrap_or(defaults.concurrency),
        max_attempts: max_attempts
            .or(project.backend.max_attempts)
            .unwrap_or(defaults.max_attempts),
        initial_backoff_ms: backoff_ms.unwrap_or(defaults.initial_backoff_ms),
    }
}

/// Drive a plan through a backend, streaming results to `results_path` and
/// writing the manifest next to them.
///
/// Lines are appended in completion order while the run is live (so a crash
/// leaves inspectable partial output), then the file is rewritten in plan
/// order once the run finishes: identical runs must produce identical bytes
/// regardless of worker scheduling.
pub fn execute_plan(
    plan: &SimulationPlan,
    backend: &dyn AgentBackend,
    options: &RunOptions,
    results_path: &Path,
    manifest_path: &Path,
    quiet: bool,
) -> Result<RunOutput> {
    let file = File::create(results_path)
        .with_context(|| format!("cannot create {}", results_path.display()))?;
    let mut writer = BufWriter::new(file);
    let total = plan.population.len();
    let step = (total / 20).max(1);
    let mut done = 0usize;
    let run = run_simulation(plan, backend, options, |result| {
        if let Ok(line) = serde_json::to_string(result) {
            let _ = writeln!(writer, "{line}");
            let _ = writer.flush();
        }
        done += 1;
        if !quiet && (done % step == 0 || done == total) {
            eprintln!("progress: {done}/{total} agents");
        }
    })?;
    drop(writer);
    let mut ordered = Vec::new();
    for result in &run.results {
        serde_json::to_writer(&mut ordered, result)?;
        ordered.push(b'\n');
    }
    std::fs::write(results_path, ordered)
        .with_context(|| format!("cannot write {}", results_path.display()))?;
    output::write_json_file(manifest_path, &run.manifest)?;
    Ok(run)
}

#[derive(Debug, Serialize)]
struct RunSummary<'a> {
    results: &'a Path,
    manifest_file: &'a Path,
    manifest: &'a RunManifest,
}

pub fn run(args: &RunArgs, project: &ProjectConfig, json: bool, quiet: bool) -> Result<()> {
    let plan = SimulationPlan::load(&args.plan)?;
    if let Some(seed) = args.seed {
        if seed != plan.seed {
            bail!(
                "{} embeds seed {}, not {}; the plan's seed governs execution — rebuild the plan to change it",
                args.plan.display(),
                plan.seed,
                seed
            );
        }
    }
    let out_dir = match &args.output_dir {
        Some(dir) => dir.clone(),
        None => base_dir(&args.plan).to_path_buf(),
    };
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;
    let results_path = out_dir.join("results.jsonl");
    let manifest_path = out_dir.join("manifest.json");
    let backend = make_backend(
        args.backend,
        project,
        args.endpoint.as_deref(),
        args.model.as_deref(),
    );
    let options = run_options(project, args.concurrency, args.max_attempts, args.backoff_ms);
    let run = execute_plan(
        &plan,
        backend.as_ref(),
        &options,
        &results_path,
        &manifest_path,
        quiet,
    )?;
    let manifest = &run.manifest;
    if json {
        output::print_json(&RunSummary {
            results: &results_path,
            manifest_file: &manifest_path,
            manifest,
        })?;
    } else {
        println!(
            "ran scenario '{}': {} of {} agents valid (backend {}, concurrency {})",
            manifest.scenario_id,
            manifest.completed,
            manifest.population,
            manifest.backend,
            manifest.concurrency
        );
        println!("results  {}", results_path.display());
        println!("manifest {}", manifest_path.display());
    }
    if manifest.aborted {
        bail!(
            "run aborted: {} (partial results kept in {})",
            manifest.abort_reason.as_deref().unwrap_or("unknown reason"),
            out_dir.display()
        );
    }
    Ok(())
}
