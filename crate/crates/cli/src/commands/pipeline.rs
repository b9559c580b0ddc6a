//! `pipeline` subcommand: plan, run, and evaluate in one run directory.
//!
//! Artifacts land under `<runs>/<scenario_id>/<timestamp>-<seed>/` as
//! `plan.json`, `results.jsonl`, `manifest.json`, and `report.json`. Each
//! stage persists its artifact before the next stage starts, so a failure
//! partway through (an aborted run, a missing ground-truth file) still leaves
//! everything produced so far on disk. The command exits zero only when the
//! evaluation report was written.

use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::Utc;
use clap::Args;
use serde::Serialize;
use socioverse_core::evaluation::{evaluate, EvaluationReport, GroundTruth};

use crate::commands::run::{execute_plan, make_backend, run_options};
use crate::commands::scenario::compile_plan;
use crate::commands::base_dir;
use crate::output;
use crate::project::{resolve_seed, BackendKind, ProjectConfig};

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Scenario config file.
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Plan seed (default: project config seed, then 42).
    #[arg(long)]
    seed: Option<u64>,
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
    /// Run-directory root (default: project config `paths.runs`, then ./runs).
    #[arg(long, value_name = "DIR")]
    runs_dir: Option<PathBuf>,
    /// Chat-completions endpoint (http backend only).
    #[arg(long, value_name = "URL")]
    endpoint: Option<String>,
    /// Model name (http backend only).
    #[arg(long, value_name = "NAME")]
    model: Option<String>,
}

/// Claim a fresh `<root>/<scenario_id>/<timestamp>-<seed>` directory.
/// `create_dir` is the claim itself, so two pipelines starting in the same
/// second cannot share a directory; later claimants get a `.2`, `.3`, ...
/// suffix.
fn allocate_run_dir(root: &Path, scenario_id: &str, seed: u64) -> Result<PathBuf> {
    let stamp = Utc::now().format("%Y%m%dT%H%M%SZ").to_string();
    let parent = root.join(scenario_id);
    std::fs::create_dir_all(&parent)
        .with_context(|| format!("cannot create {}", parent.display()))?;
    let mut suffix = 1u32;
    loop {
        let name = if suffix == 1 {
            format!("{stamp}-{seed}")
        } else {
            format!("{stamp}-{seed}.{suffix}")
        };
        let candidate = parent.join(name);
        match std::fs::create_dir(&candidate) {
            Ok(()) => return Ok(candidate),
            Err(e) if e.kind() == ErrorKind::AlreadyExists => suffix += 1,
            Err(e) => {
                return Err(e).with_context(|| format!("cannot create {}", candidate.display()))
            }
        }
    }
}

#[derive(Debug, Serialize)]
struct PipelineSummary<'a> {
    run_dir: &'a Path,
    report: &'a EvaluationReport,
}

pub fn run(args: &PipelineArgs, project: &ProjectConfig, json: bool, quiet: bool) -> Result<()> {
    let seed = resolve_seed(args.seed, project);
    let (config, plan) = compile_plan(&args.config, seed, quiet)?;

    let runs_root = args
        .runs_dir
        .clone()
        .or_else(|| project.paths.runs.clone())
        .unwrap_or_else(|| PathBuf::from("runs"));
    let run_dir = allocate_run_dir(&runs_root, &config.scenario_id, seed)?;
    plan.save(run_dir.join("plan.json"))?;
    if !quiet {
        eprintln!("run directory: {}", run_dir.display());
    }

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
        &run_dir.join("results.jsonl"),
        &run_dir.join("manifest.json"),
        quiet,
    )?;
    if run.manifest.aborted {
        bail!(
            "run aborted: {} (plan, partial results, and manifest kept in {})",
            run.manifest.abort_reason.as_deref().unwrap_or("unknown reason"),
            run_dir.display()
        );
    }

    let truth_path = base_dir(&args.config).join(&config.ground_truth);
    let truth = GroundTruth::load(&truth_path).with_context(|| {
        format!(
            "cannot load ground truth {} (plan and results kept in {})",
            truth_path.display(),
            run_dir.display()
        )
    })?;
    let report = evaluate(&plan, &run.results, &truth).with_context(|| {
        format!(
            "evaluation failed (plan and results kept in {})",
            run_dir.display()
        )
    })?;
    report.save(run_dir.join("report.json"))?;

    if json {
        output::print_json(&PipelineSummary { run_dir: &run_dir, report: &report })?;
    } else {
        print!("{}", output::render_report(&report));
        println!("\nrun directory: {}", run_dir.display());
    }
    Ok(())
}
