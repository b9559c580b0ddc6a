//! Output rendering: human-readable tables, machine-readable JSON, and
//! long-form CSV series for external plotting.
//!
//! Every subcommand prints either a human summary or (with `--json`) exactly
//! one JSON document on stdout; progress chatter always goes to stderr so
//! stdout stays parseable.

use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use socioverse_core::evaluation::{EvaluationDetail, EvaluationReport};

// === generic helpers ====================================================

/// Pretty-print one JSON document to stdout.
pub fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    println!("{text}");
    Ok(())
}

/// Write pretty JSON to a file (same canonical form the library savers use).
pub fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let bytes = serde_json::to_vec_pretty(value)?;
    std::fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Fixed-point metric formatting used across all human tables.
pub fn metric(value: f64) -> String {
    format!("{value:.6}")
}

/// A plain-text table with per-column width alignment. Numeric-looking cells
/// are right-aligned so columns of metrics line up on the decimal point.
pub struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Table {
        Table {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.headers.len());
        self.rows.push(cells);
    }

    pub fn render(&self, indent: &str) -> String {
        let cols = self.headers.len();
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.len()).collect();
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                widths[i] = widths[i].max(cell.len());
            }
        }
        let numeric: Vec<bool> = (0..cols)
            .map(|i| {
                !self.rows.is_empty()
                    && self
                        .rows
                        .iter()
                        .all(|row| row[i].is_empty() || row[i].parse::<f64>().is_ok())
            })
            .collect();
        let mut out = String::new();
        let push_row = |cells: &[String], out: &mut String| {
            out.push_str(indent);
            for (i, cell) in cells.iter().enumerate() {
                if i > 0 {
                    out.push_str("  ");
                }
                if numeric[i] {
                    out.push_str(&format!("{cell:>width$}", width = widths[i]));
                } else if i + 1 == cols {
                    out.push_str(cell);
                } else {
                    out.push_str(&format!("{cell:<width$}", width = widths[i]));
                }
            }
            while out.ends_with(' ') {
                out.pop();
            }
            out.push('\n');
        };
        push_row(&self.headers.clone(), &mut out);
        for row in &self.rows {
            push_row(row, &mut out);
        }
        out
    }
}

// === evaluation report rendering ========================================

/// Render the full human-readable evaluation table.
pub fn render_report(report: &EvaluationReport) -> String {
    let kind = serde_json::to_value(report.kind)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_else(|| format!("{:?}", report.kind));
    let mut out = format!(
        "scenario {} ({kind}): {} agents, {} valid\n\n",
        report.scenario_id,
        report.agents_total,
        report.agents_valid
    );
    let mut headline = Table::new(&["metric", "value"]);
    for (name, value) in &report.headline {
        headline.row(vec![name.clone(), metric(*value)]);
    }
    out.push_str(&headline.render("  "));

    match &report.detail {
        EvaluationDetail::Election { groups, subsets } => {
            out.push('\n');
            let mut table = Table::new(&["group", "predicted", "actual", "correct"]);
            for (group, entry) in groups {
                let mut verdict = if entry.correct { "yes" } else { "no" }.to_string();
                if entry.tied {
                    verdict.push_str(" (tie)");
                }
                table.row(vec![
                    group.clone(),
                    entry.predicted_winner.clone(),
                    entry.true_winner.clone(),
                    verdict,
                ]);
            }
            out.push_str(&table.render("  "));
            if !subsets.is_empty() {
                out.push('\n');
                let mut table = Table::new(&["subset", "groups", "accuracy", "rmse"]);
                for (name, subset) in subsets {
                    table.row(vec![
                        name.clone(),
                        subset.groups.len().to_string(),
                        metric(subset.accuracy),
                        metric(subset.rmse),
                    ]);
                }
                out.push_str(&table.render("  "));
            }
        }
        EvaluationDetail::News { dimensions } => {
            out.push('\n');
            let mut table =
                Table::new(&["dimension", "predicted", "actual", "kl", "samples"]);
            for (name, entry) in dimensions {
                table.row(vec![
                    name.clone(),
                    metric(entry.predicted_mean),
                    metric(entry.true_mean),
                    metric(entry.kl),
                    entry.samples.to_string(),
                ]);
            }
            out.push_str(&table.render("  "));
        }
        EvaluationDetail::Economic { overall_shares, groups, subsets } => {
            out.push('\n');
            let mut table = Table::new(&["category", "predicted share"]);
            for (category, share) in overall_shares {
                table.row(vec![category.clone(), metric(*share)]);
            }
            out.push_str(&table.render("  "));
            if !groups.is_empty() {
                out.push('\n');
                let mut table = Table::new(&["group", "kl", "rmse", "nrmse"]);
                for (name, entry) in groups {
                    table.row(vec![
                        name.clone(),
                        metric(entry.kl),
                        metric(entry.rmse),
                        entry.nrmse.map(metric).unwrap_or_default(),
                    ]);
                }
                out.push_str(&table.render("  "));
            }
            if !subsets.is_empty() {
                out.push('\n');
                let mut table = Table::new(&["subset", "kl", "rmse", "nrmse"]);
                for (name, entry) in subsets {
                    table.row(vec![
                        name.clone(),
                        metric(entry.kl),
                        metric(entry.rmse),
                        entry.nrmse.map(metric).unwrap_or_default(),
                    ]);
                }
                out.push_str(&table.render("  "));
            }
        }
    }
    out
}

// === CSV series ==========================================================

/// Write the report as long-form CSV (`series,group,key,predicted,actual`),
/// one row per plotted point, so external tools can chart shares,
/// distributions, and per-group metrics without parsing nested JSON.
pub fn write_report_csv(path: &Path, report: &EvaluationReport) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    writer.write_record(["series", "group", "key", "predicted", "actual"])?;
    let mut row = |series: &str, group: &str, key: &str, predicted: String, actual: String| {
        writer.write_record([series, group, key, &predicted, &actual])
    };
    for (name, value) in &report.headline {
        row("headline", "", name, value.to_string(), String::new())?;
    }
    match &report.detail {
        EvaluationDetail::Election { groups, subsets } => {
            for (group, entry) in groups {
                for (label, predicted) in &entry.predicted_shares {
                    let actual = entry.true_shares.get(label).copied().unwrap_or(0.0);
                    row("vote_share", group, label, predicted.to_string(), actual.to_string())?;
                }
                row(
                    "winner_correct",
                    group,
                    "",
                    if entry.correct { "1" } else { "0" }.to_string(),
                    String::new(),
                )?;
            }
            for (name, subset) in subsets {
                row("subset_accuracy", name, "", subset.accuracy.to_string(), String::new())?;
                row("subset_rmse", name, "", subset.rmse.to_string(), String::new())?;
            }
        }
        EvaluationDetail::News { dimensions } => {
            for (name, entry) in dimensions {
                row(
                    "mean",
                    name,
                    "",
                    entry.predicted_mean.to_string(),
                    entry.true_mean.to_string(),
                )?;
                for (i, predicted) in entry.predicted_distribution.iter().enumerate() {
                    let actual = entry.true_distribution.get(i).copied().unwrap_or(0.0);
                    row(
                        "distribution",
                        name,
                        &(i + 1).to_string(),
                        predicted.to_string(),
                        actual.to_string(),
                    )?;
                }
            }
        }
        EvaluationDetail::Economic { overall_shares, groups, subsets } => {
            for (category, share) in overall_shares {
                row("spending_share", "overall", category, share.to_string(), String::new())?;
            }
            for (scope, entries) in [("", groups), ("subset:", subsets)] {
                for (name, entry) in entries {
                    let group = format!("{scope}{name}");
                    for (category, predicted) in &entry.predicted {
                        let actual = entry.actual.get(category).copied().unwrap_or(0.0);
                        row(
                            "spending_share",
                            &group,
                            category,
                            predicted.to_string(),
                            actual.to_string(),
                        )?;
                    }
                    row("group_kl", &group, "", entry.kl.to_string(), String::new())?;
                    row("group_rmse", &group, "", entry.rmse.to_string(), String::new())?;
                    if let Some(nrmse) = entry.nrmse {
                        row("group_nrmse", &group, "", nrmse.to_string(), String::new())?;
                    }
                }
            }
        }
    }
    writer.flush()?;
    Ok(())
}
