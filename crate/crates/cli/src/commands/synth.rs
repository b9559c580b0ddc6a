//! `synth` subcommands: IPF fitting, joint-table sampling, income draws.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand};
use serde::Serialize;
use socioverse_core::synthesis::{
    income_mixture_draws, ipf_fit, sample_profiles, ContingencyTable, IncomeBranch,
    IncomeMixtureParams, IpfOptions, MarginalTargets,
};

use crate::output;

#[derive(Debug, Subcommand)]
pub enum SynthCmd {
    /// Fit a seed contingency table to marginal targets.
    Ipf(IpfArgs),
    /// Draw agent profiles from a joint distribution table.
    Sample(SampleArgs),
    /// Draw incomes from the log-normal body + Pareto tail mixture.
    Income(IncomeArgs),
}

#[derive(Debug, Args)]
pub struct IpfArgs {
    /// Seed contingency table (JSON).
    #[arg(long, value_name = "FILE")]
    seed: PathBuf,
    /// Marginal targets (JSON).
    #[arg(long, value_name = "FILE")]
    targets: PathBuf,
    /// Convergence tolerance on the worst relative marginal gap.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Sweep budget before giving up.
    #[arg(long, default_value_t = 1000)]
    max_iterations: usize,
    /// Write the fitted joint table here.
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Write the per-sweep convergence series as CSV.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Joint distribution table (JSON).
    #[arg(long, value_name = "FILE")]
    joint: PathBuf,
    /// Number of profiles to draw.
    #[arg(short = 'n', long = "count", value_name = "N")]
    count: usize,
    /// RNG seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Write the profiles as a JSON array.
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IncomeArgs {
    /// Mixture parameter file (JSON).
    #[arg(long, value_name = "FILE", conflicts_with_all = ["mean", "sigma", "share", "alpha"])]
    params: Option<PathBuf>,
    /// Target mean of drawn incomes (direct parameterization).
    #[arg(long, requires = "sigma")]
    mean: Option<f64>,
    /// Target standard deviation of drawn incomes.
    #[arg(long, requires = "mean")]
    sigma: Option<f64>,
    /// Log-normal branch share (direct parameterization; default 0.9).
    #[arg(long, requires = "mean")]
    share: Option<f64>,
    /// Pareto tail exponent (direct parameterization; default 2.5).
    #[arg(long, requires = "mean")]
    alpha: Option<f64>,
    /// Number of draws.
    #[arg(short = 'n', long = "count", value_name = "N")]
    count: usize,
    /// RNG seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Write the draws as CSV (`value,branch`).
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
}

pub fn run(cmd: &SynthCmd, json: bool) -> Result<()> {
    match cmd {
        SynthCmd::Ipf(args) => ipf(args, json),
        SynthCmd::Sample(args) => sample(args, json),
        SynthCmd::Income(args) => income(args, json),
    }
}

#[derive(Debug, Serialize)]
struct IpfSummary<'a> {
    converged: bool,
    iterations: usize,
    max_relative_gap: f64,
    cells: usize,
    axes: Vec<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<&'a Path>,
}

fn ipf(args: &IpfArgs, json: bool) -> Result<()> {
    let table = ContingencyTable::load(&args.seed)?;
    let targets = MarginalTargets::load(&args.targets)?;
    let result = ipf_fit(
        &table,
        &targets,
        IpfOptions { tolerance: args.tol, max_iterations: args.max_iterations },
    )?;
    if let Some(out) = &args.output {
        result.fitted.save(out)?;
    }
    if let Some(path) = &args.csv {
        let mut writer = csv::Writer::from_path(path)
            .with_context(|| format!("cannot write {}", path.display()))?;
        writer.write_record(["sweep", "max_relative_gap"])?;
        for (sweep, gap) in result.gap_history.iter().enumerate() {
            writer.write_record([(sweep + 1).to_string(), gap.to_string()])?;
        }
        writer.flush()?;
    }
    let summary = IpfSummary {
        converged: result.converged,
        iterations: result.iterations,
        max_relative_gap: result.max_relative_gap,
        cells: result.fitted.cells().len(),
        axes: result.fitted.axes().iter().map(|a| a.name.as_str()).collect(),
        output: args.output.as_deref(),
    };
    if json {
        output::print_json(&summary)?;
    } else {
        println!(
            "fit {} cells over axes [{}]",
            summary.cells,
            summary.axes.join(", ")
        );
        println!(
            "{} in {} sweeps (max relative gap {:.3e})",
            if summary.converged { "converged" } else { "did not converge" },
            summary.iterations,
            summary.max_relative_gap
        );
        if let Some(out) = &args.output {
            println!("wrote fitted table to {}", out.display());
        }
    }
    if !result.converged {
        bail!(
            "marginal fit did not reach tolerance {:.1e} within {} sweeps",
            args.tol,
            args.max_iterations
        );
    }
    Ok(())
}

fn sample(args: &SampleArgs, json: bool) -> Result<()> {
    let table = ContingencyTable::load(&args.joint)?;
    let profiles = sample_profiles(&table, args.count, args.seed)?;
    if let Some(out) = &args.output {
        output::write_json_file(out, &profiles)?;
    }
    if json {
        if args.output.is_some() {
            output::print_json(&serde_json::json!({
                "count": profiles.len(),
                "seed": args.seed,
                "output": args.output,
            }))?;
        } else {
            output::print_json(&profiles)?;
        }
        return Ok(());
    }
    let axes: Vec<&str> = table.axes().iter().map(|a| a.name.as_str()).collect();
    println!(
        "drew {} profiles from a {}-axis joint [{}] (seed {})",
        profiles.len(),
        axes.len(),
        axes.join(", "),
        args.seed
    );
    match &args.output {
        Some(out) => println!("wrote profiles to {}", out.display()),
        None => println!("pass --output (or --json) to capture the profiles"),
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct IncomeSummary<'a> {
    count: usize,
    seed: u64,
    mean: f64,
    sd: f64,
    min: f64,
    max: f64,
    pareto_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<&'a Path>,
}

fn income(args: &IncomeArgs, json: bool) -> Result<()> {
    let params = match (&args.params, args.mean, args.sigma) {
        (Some(path), None, None) => IncomeMixtureParams::load(path)?,
        (None, Some(mean), Some(sigma)) => IncomeMixtureParams::with_mixture(
            mean,
            sigma,
            args.share.unwrap_or(0.9),
            args.alpha.unwrap_or(2.5),
        )?,
        _ => bail!("provide either --params <file> or both --mean and --sigma"),
    };
    let draws = income_mixture_draws(&params, args.count, args.seed)?;
    if let Some(out) = &args.output {
        let mut writer = csv::Writer::from_path(out)
            .with_context(|| format!("cannot write {}", out.display()))?;
        writer.write_record(["value", "branch"])?;
        for draw in &draws {
            let branch = match draw.branch {
                IncomeBranch::LogNormal => "log_normal",
                IncomeBranch::Pareto => "pareto",
            };
            writer.write_record([draw.value.to_string().as_str(), branch])?;
        }
        writer.flush()?;
    }
    let n = draws.len().max(1) as f64;
    let mean = draws.iter().map(|d| d.value).sum::<f64>() / n;
    let variance = draws.iter().map(|d| (d.value - mean).powi(2)).sum::<f64>() / n;
    let pareto = draws.iter().filter(|d| d.branch == IncomeBranch::Pareto).count() as f64 / n;
    let summary = IncomeSummary {
        count: draws.len(),
        seed: args.seed,
        mean,
        sd: variance.sqrt(),
        min: draws.iter().map(|d| d.value).fold(f64::INFINITY, f64::min),
        max: draws.iter().map(|d| d.value).fold(f64::NEG_INFINITY, f64::max),
        pareto_fraction: pareto,
        output: args.output.as_deref(),
    };
    if json {
        output::print_json(&summary)?;
    } else {
        println!("drew {} incomes (seed {})", summary.count, summary.seed);
        let mut table = output::Table::new(&["statistic", "value"]);
        table.row(vec!["mean".into(), format!("{:.2}", summary.mean)]);
        table.row(vec!["sd".into(), format!("{:.2}", summary.sd)]);
        table.row(vec!["min".into(), format!("{:.2}", summary.min)]);
        table.row(vec!["max".into(), format!("{:.2}", summary.max)]);
        table.row(vec!["pareto share".into(), format!("{:.4}", summary.pareto_fraction)]);
        print!("{}", table.render("  "));
        if let Some(out) = &args.output {
            println!("wrote draws to {}", out.display());
        }
    }
    Ok(())
}
