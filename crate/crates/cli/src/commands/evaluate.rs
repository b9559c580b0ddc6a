//! `evaluate` subcommand: score run results against ground truth.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::Args;
use socioverse_core::behavior::AgentResult;
use socioverse_core::evaluation::{evaluate, GroundTruth};
use socioverse_core::scenario::{ScenarioConfig, SimulationPlan};

use crate::commands::base_dir;
use crate::output;

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Agent results (JSONL) written by `run`.
    #[arg(long, value_name = "FILE")]
    results: PathBuf,
    /// Ground-truth file.
    #[arg(long, value_name = "FILE")]
    truth: PathBuf,
    /// Scenario config the run was planned from (cross-checked with the plan).
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Simulation plan (default: plan.json next to --results).
    #[arg(long, value_name = "FILE")]
    plan: Option<PathBuf>,
    /// Extra named group subsets to score: JSON map of name -> [group, ...].
    #[arg(long, value_name = "FILE")]
    subset: Option<PathBuf>,
    /// Write the report JSON here as well as printing it.
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Write long-form metric series as CSV for external plotting.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

/// Parse a results JSONL file (one agent result per line, blanks ignored).
pub fn read_results(path: &Path) -> Result<Vec<AgentResult>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut results = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let result: AgentResult = serde_json::from_str(&line)
            .with_context(|| format!("{}:{}: malformed result line", path.display(), i + 1))?;
        results.push(result);
    }
    Ok(results)
}

/// Merge extra subsets (name -> member groups) into the loaded truth.
fn merge_subsets(truth: &mut GroundTruth, path: &Path) -> Result<()> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let extra: BTreeMap<String, Vec<String>> = serde_json::from_str(&text)
        .with_context(|| format!("cannot parse subsets {}", path.display()))?;
    let subsets = match truth {
        GroundTruth::Election { subsets, .. } => subsets,
        GroundTruth::Economic { subsets, .. } => subsets,
        GroundTruth::News { .. } => {
            bail!("attitude-survey ground truth has no group subsets to extend")
        }
    };
    for (name, groups) in extra {
        if subsets.contains_key(&name) {
            bail!("subset '{name}' is already defined in the truth file");
        }
        subsets.insert(name, groups);
    }
    Ok(())
}

pub fn run(args: &EvaluateArgs, json: bool) -> Result<()> {
    let plan_path = args
        .plan
        .clone()
        .unwrap_or_else(|| base_dir(&args.results).join("plan.json"));
    let plan = SimulationPlan::load(&plan_path).with_context(|| {
        format!(
            "cannot load plan {} (pass --plan if it lives elsewhere)",
            plan_path.display()
        )
    })?;
    let results = read_results(&args.results)?;
    let mut truth = GroundTruth::load(&args.truth)?;
    let config = ScenarioConfig::load(&args.config)?;
    ensure!(
        config.scenario_id == plan.scenario_id,
        "config is for scenario '{}' but the plan is for '{}'",
        config.scenario_id,
        plan.scenario_id
    );
    ensure!(
        config.kind == plan.kind,
        "config kind {:?} does not match plan kind {:?}",
        config.kind,
        plan.kind
    );
    ensure!(
        config.vote_question == plan.vote_question && config.group_key == plan.group_key,
        "config grouping/vote settings differ from the plan; was the config edited after planning?"
    );
    if let Some(path) = &args.subset {
        merge_subsets(&mut truth, path)?;
    }
    let report = evaluate(&plan, &results, &truth)?;
    if let Some(out) = &args.output {
        report.save(out)?;
    }
    if let Some(path) = &args.csv {
        output::write_report_csv(path, &report)?;
    }
    if json {
        output::print_json(&report)?;
    } else {
        print!("{}", output::render_report(&report));
        if let Some(out) = &args.output {
            println!("\nwrote report to {}", out.display());
        }
        if let Some(path) = &args.csv {
            println!("wrote CSV series to {}", path.display());
        }
    }
    Ok(())
}
