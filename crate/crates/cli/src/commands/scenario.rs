//! `scenario` subcommands: validate configs, compile simulation plans.

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Subcommand};
use serde::Serialize;
use socioverse_core::pool::Pool;
use socioverse_core::scenario::{
    build_plan, is_runnable, validate_scenario, Finding, ScenarioConfig, Severity,
};

use crate::commands::base_dir;
use crate::output;
use crate::project::{resolve_seed, ProjectConfig};

#[derive(Debug, Subcommand)]
pub enum ScenarioCmd {
    /// Cross-check a scenario config against its referenced files.
    Validate(ValidateArgs),
    /// Compile a scenario config into a concrete, seeded simulation plan.
    Plan(PlanArgs),
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Scenario config file.
    config: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Scenario config file.
    config: PathBuf,
    /// Plan seed (default: project config seed, then 42).
    #[arg(long)]
    seed: Option<u64>,
    /// Output plan file.
    #[arg(short, long, default_value = "plan.json")]
    output: PathBuf,
}

pub fn run(cmd: &ScenarioCmd, project: &ProjectConfig, json: bool, quiet: bool) -> Result<()> {
    match cmd {
        ScenarioCmd::Validate(args) => validate(args, json),
        ScenarioCmd::Plan(args) => plan(args, project, json, quiet),
    }
}

fn severity_str(severity: Severity) -> &'static str {
    match severity {
        Severity::Error => "error",
        Severity::Warning => "warning",
    }
}

#[derive(Debug, Serialize)]
struct ValidateSummary<'a> {
    scenario_id: &'a str,
    runnable: bool,
    findings: &'a [Finding],
}

fn validate(args: &ValidateArgs, json: bool) -> Result<()> {
    let config = ScenarioConfig::load(&args.config)?;
    let findings = validate_scenario(&config, base_dir(&args.config));
    let runnable = is_runnable(&findings);
    if json {
        output::print_json(&ValidateSummary {
            scenario_id: &config.scenario_id,
            runnable,
            findings: &findings,
        })?;
    } else {
        for finding in &findings {
            println!("{}: {}", severity_str(finding.severity), finding.message);
        }
        if runnable {
            println!("ok: scenario '{}' is runnable", config.scenario_id);
        }
    }
    if !runnable {
        let errors = findings.iter().filter(|f| f.severity == Severity::Error).count();
        bail!("{} blocking finding(s) in {}", errors, args.config.display());
    }
    Ok(())
}

/// Load a config, surface findings (warnings to stderr, errors fatal), load
/// its pool, and compile the plan. Shared with the pipeline command.
pub fn compile_plan(
    config_path: &std::path::Path,
    seed: u64,
    quiet: bool,
) -> Result<(ScenarioConfig, socioverse_core::scenario::SimulationPlan)> {
    let config = ScenarioConfig::load(config_path)?;
    let base = base_dir(config_path);
    let findings = validate_scenario(&config, base);
    if !quiet {
        for finding in findings.iter().filter(|f| f.severity == Severity::Warning) {
            eprintln!("warning: {}", finding.message);
        }
    }
    if !is_runnable(&findings) {
        let errors: Vec<String> = findings
            .iter()
            .filter(|f| f.severity == Severity::Error)
            .map(|f| f.message.clone())
            .collect();
        bail!(
            "scenario {} is not runnable: {}",
            config_path.display(),
            errors.join("; ")
        );
    }
    let (pool, _) = Pool::load(base.join(&config.pool), base.join(&config.schema))?;
    let plan = build_plan(&config, base, &pool, seed)?;
    Ok((config, plan))
}

#[derive(Debug, Serialize)]
struct PlanSummary<'a> {
    scenario_id: &'a str,
    agents: usize,
    seed: u64,
    plan_hash: String,
    output: &'a std::path::Path,
}

fn plan(args: &PlanArgs, project: &ProjectConfig, json: bool, quiet: bool) -> Result<()> {
    let seed = resolve_seed(args.seed, project);
    let (_, plan) = compile_plan(&args.config, seed, quiet)?;
    plan.save(&args.output)?;
    let summary = PlanSummary {
        scenario_id: &plan.scenario_id,
        agents: plan.population.len(),
        seed,
        plan_hash: plan.content_hash(),
        output: &args.output,
    };
    if json {
        output::print_json(&summary)?;
    } else {
        println!(
            "planned scenario '{}': {} agents, seed {}",
            summary.scenario_id, summary.agents, summary.seed
        );
        println!("plan hash {}", summary.plan_hash);
        println!("wrote {}", args.output.display());
    }
    Ok(())
}
