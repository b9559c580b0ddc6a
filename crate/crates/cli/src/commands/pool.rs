//! `pool` subcommands: ingest, clean, and stats over user-pool JSONL files.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Subcommand};
use socioverse_core::pool::{filter_abnormal, AttributeKind, MarginalDistribution, Pool};

use crate::output;

#[derive(Debug, Subcommand)]
pub enum PoolCmd {
    /// Validate a user-pool JSONL file and report ingest statistics.
    Ingest(IngestArgs),
    /// Drop users whose posts look automated (repetition above a threshold).
    Clean(CleanArgs),
    /// Print marginal label distributions over the pool.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// User pool (JSONL, one user record per line).
    file: PathBuf,
    /// Attribute schema file.
    #[arg(long, value_name = "FILE")]
    schema: PathBuf,
    /// Re-export the validated pool as canonical JSONL.
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CleanArgs {
    /// User pool (JSONL) to clean.
    file: PathBuf,
    /// Attribute schema file.
    #[arg(long, value_name = "FILE")]
    schema: PathBuf,
    /// Repetition ratio above which a user's posting counts as automated.
    #[arg(long, default_value_t = 0.3)]
    threshold: f64,
    /// Minimum number of posts before the repetition test applies.
    #[arg(long, default_value_t = 3)]
    min_posts: usize,
    /// Write the cleaned pool here (omitted: dry run, report only).
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Also write the removal report as JSON.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// User pool (JSONL).
    file: PathBuf,
    /// Attribute schema file.
    #[arg(long, value_name = "FILE")]
    schema: PathBuf,
    /// Attribute to summarize (repeatable; default: every categorical one).
    #[arg(long = "attribute", value_name = "NAME")]
    attributes: Vec<String>,
}

pub fn run(cmd: &PoolCmd, json: bool) -> Result<()> {
    match cmd {
        PoolCmd::Ingest(args) => ingest(args, json),
        PoolCmd::Clean(args) => clean(args, json),
        PoolCmd::Stats(args) => stats(args, json),
    }
}

fn write_pool(pool: &Pool, path: &Path) -> Result<()> {
    let file =
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    pool.write_jsonl(BufWriter::new(file))?;
    Ok(())
}

fn ingest(args: &IngestArgs, json: bool) -> Result<()> {
    let (pool, stats) = Pool::load(&args.file, &args.schema)?;
    if let Some(out) = &args.output {
        write_pool(&pool, out)?;
    }
    if json {
        output::print_json(&stats)?;
    } else {
        println!(
            "ingested {} users ({} posts) from {}",
            stats.users,
            stats.posts,
            args.file.display()
        );
        if let Some(out) = &args.output {
            println!("wrote canonical pool to {}", out.display());
        }
    }
    Ok(())
}

fn clean(args: &CleanArgs, json: bool) -> Result<()> {
    let (pool, _) = Pool::load(&args.file, &args.schema)?;
    let (cleaned, report) = filter_abnormal(&pool, args.threshold, args.min_posts)?;
    if let Some(out) = &args.output {
        write_pool(&cleaned, out)?;
    }
    if let Some(path) = &args.report {
        output::write_json_file(path, &report)?;
    }
    if json {
        output::print_json(&report)?;
        return Ok(());
    }
    println!(
        "removed {} of {} users (retention {:.1}%)",
        report.removed.len(),
        report.total_users,
        report.retention_rate * 100.0
    );
    const LISTED: usize = 20;
    for key in report.removed.iter().take(LISTED) {
        println!("  removed {}/{}", key.platform, key.user_id);
    }
    if report.removed.len() > LISTED {
        println!("  ... and {} more", report.removed.len() - LISTED);
    }
    match &args.output {
        Some(out) => println!("wrote cleaned pool to {}", out.display()),
        None => println!("dry run: pass --output to write the cleaned pool"),
    }
    Ok(())
}

fn stats(args: &StatsArgs, json: bool) -> Result<()> {
    let (pool, _) = Pool::load(&args.file, &args.schema)?;
    let names: Vec<String> = if args.attributes.is_empty() {
        pool.schema()
            .iter()
            .filter(|a| matches!(a.kind, AttributeKind::Categorical { .. }))
            .map(|a| a.name.clone())
            .collect()
    } else {
        args.attributes.clone()
    };
    let mut distributions: Vec<MarginalDistribution> = Vec::with_capacity(names.len());
    for name in &names {
        distributions.push(pool.marginal_distribution(name)?);
    }
    if json {
        return output::print_json(&distributions);
    }
    let mut first = true;
    for dist in &distributions {
        if !first {
            println!();
        }
        first = false;
        println!(
            "attribute {}: {} labeled, {} missing",
            dist.attribute, dist.counted, dist.missing
        );
        let mut table = output::Table::new(&["category", "count", "probability"]);
        for (category, probability) in dist.categories.iter().zip(&dist.probabilities) {
            let count = (probability * dist.counted as f64).round() as usize;
            table.row(vec![
                category.clone(),
                count.to_string(),
                output::metric(*probability),
            ]);
        }
        print!("{}", table.render("  "));
    }
    Ok(())
}
