//! Scoring simulation results against ground truth.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::behavior::{AgentResult, AnswerValue};
use crate::scenario::{ScenarioKind, SimulationPlan};
use crate::{Error, Result};

use super::aggregate::{likert_aggregate, spending_aggregate, winner_takes_all};
use super::metrics::{kl_divergence, nrmse, rmse};
use super::truth::GroundTruth;

/// One election group, scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectionGroupReport {
    pub predicted_winner: String,
    pub true_winner: String,
    pub correct: bool,
    /// The predicted call rested on a tie broken lexicographically.
    pub tied: bool,
    pub predicted_shares: BTreeMap<String, f64>,
    pub true_shares: BTreeMap<String, f64>,
}

/// Metrics over a named subset of election groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetReport {
    pub groups: Vec<String>,
    pub accuracy: f64,
    pub rmse: f64,
}

/// One attitude dimension, scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewsDimensionReport {
    pub predicted_mean: f64,
    pub true_mean: f64,
    pub kl: f64,
    pub predicted_distribution: Vec<f64>,
    pub true_distribution: Vec<f64>,
    pub samples: usize,
}

/// One spending group, scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconomicGroupReport {
    pub predicted: BTreeMap<String, f64>,
    pub actual: BTreeMap<String, f64>,
    pub kl: f64,
    pub rmse: f64,
    /// Absent when the actual shares are constant (no range to normalize by).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nrmse: Option<f64>,
}

/// Kind-specific evaluation detail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvaluationDetail {
    Election {
        groups: BTreeMap<String, ElectionGroupReport>,
        subsets: BTreeMap<String, SubsetReport>,
    },
    News {
        dimensions: BTreeMap<String, NewsDimensionReport>,
    },
    Economic {
        overall_shares: BTreeMap<String, f64>,
        groups: BTreeMap<String, EconomicGroupReport>,
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        subsets: BTreeMap<String, EconomicGroupReport>,
    },
}

/// The full evaluation output. Carries no timestamps: evaluating the same
/// results against the same truth twice yields byte-identical reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub scenario_id: String,
    pub kind: ScenarioKind,
    pub agents_total: usize,
    pub agents_valid: usize,
    /// Headline metrics. Always present per kind: election `accuracy`,
    /// `rmse`, `nrmse`; news `mean_kl`, `rmse`, `nrmse`; economic `kl`,
    /// `rmse`. `nrmse` is omitted when the truth vector is constant.
    pub headline: BTreeMap<String, f64>,
    pub detail: EvaluationDetail,
}

impl EvaluationReport {
    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_vec_pretty(self)?;
        std::fs::write(path, json).map_err(|e| Error::from(e).in_file(path))
    }
}

/// Group key for each valid result's agent, looked up in the plan.
fn group_of<'a>(
    plan: &'a SimulationPlan,
    result: &AgentResult,
) -> Result<Option<&'a str>> {
    let profile = plan
        .population
        .iter()
        .find(|p| p.agent_id == result.agent_id)
        .ok_or_else(|| {
            Error::Evaluation(format!(
                "result for unknown agent '{}' — wrong plan?",
                result.agent_id
            ))
        })?;
    Ok(profile.group_key.as_deref())
}

/// Score results against ground truth for the plan's scenario kind.
///
/// Only valid agents (complete, legal answer sheets) enter the aggregates.
/// The truth's kind must match the plan's; every group or dimension the
/// truth names must be populated by at least one valid agent — silence there
/// is an error, not a zero.
pub fn evaluate(
    plan: &SimulationPlan,
    results: &[AgentResult],
    truth: &GroundTruth,
) -> Result<EvaluationReport> {
    truth.validate()?;
    if truth.kind() != plan.kind {
        return Err(Error::Evaluation(format!(
            "truth is for {:?} but the plan is {:?}",
            truth.kind(),
            plan.kind
        )));
    }
    let agents_total = results.len();
    let agents_valid = results.iter().filter(|r| r.valid).count();

    let (headline, detail) = match truth {
        GroundTruth::Election { question, groups, subsets } => {
            evaluate_election(plan, results, question, groups, subsets)?
        }
        GroundTruth::News { dimensions } => evaluate_news(plan, results, dimensions)?,
        GroundTruth::Economic { overall, groups, subsets } => {
            evaluate_economic(plan, results, overall, groups, subsets)?
        }
    };

    Ok(EvaluationReport {
        scenario_id: plan.scenario_id.clone(),
        kind: plan.kind,
        agents_total,
        agents_valid,
        headline,
        detail,
    })
}

/// Flatten (group, option) share pairs into parallel predicted/actual
/// vectors, in sorted group then sorted option order.
fn flatten_shares(
    group_names: &[&String],
    groups: &BTreeMap<String, ElectionGroupReport>,
) -> (Vec<f64>, Vec<f64>) {
    let mut predicted = Vec::new();
    let mut actual = Vec::new();
    for name in group_names {
        let report = &groups[name.as_str()];
        for (label, true_share) in &report.true_shares {
            predicted.push(report.predicted_shares.get(label).copied().unwrap_or(0.0));
            actual.push(*true_share);
        }
    }
    (predicted, actual)
}

fn evaluate_election(
    plan: &SimulationPlan,
    results: &[AgentResult],
    question: &str,
    truth_groups: &BTreeMap<String, super::truth::ElectionGroupTruth>,
    subsets: &BTreeMap<String, Vec<String>>,
) -> Result<(BTreeMap<String, f64>, EvaluationDetail)> {
    let vote_question = plan.vote_question.as_deref().ok_or_else(|| {
        Error::Evaluation("the plan names no vote question".into())
    })?;
    if vote_question != question {
        return Err(Error::Evaluation(format!(
            "truth scores question '{question}' but the plan's vote question is '{vote_question}'"
        )));
    }

    // Collect votes per group from valid agents.
    let mut votes: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for result in results.iter().filter(|r| r.valid) {
        let Some(answer) = result.answers.get(vote_question) else {
            continue;
        };
        let AnswerValue::Label(label) = answer else {
            return Err(Error::Evaluation(format!(
                "agent '{}' vote is not a single option label",
                result.agent_id
            )));
        };
        let group = group_of(plan, result)?.ok_or_else(|| {
            Error::Evaluation(format!("agent '{}' has no group key", result.agent_id))
        })?;
        votes.entry(group.to_string()).or_default().push(label.clone());
    }
    let calls = winner_takes_all(&votes)?;

    let mut groups = BTreeMap::new();
    for (name, truth) in truth_groups {
        let call = calls.get(name).ok_or_else(|| {
            Error::Evaluation(format!("no valid agents voted in group '{name}'"))
        })?;
        groups.insert(
            name.clone(),
            ElectionGroupReport {
                predicted_winner: call.winner.clone(),
                true_winner: truth.winner.clone(),
                correct: call.winner == truth.winner,
                tied: call.tied,
                predicted_shares: call.shares.clone(),
                true_shares: truth.shares.clone(),
            },
        );
    }

    let all_names: Vec<&String> = truth_groups.keys().collect();
    let correct = groups.values().filter(|g| g.correct).count();
    let accuracy = correct as f64 / groups.len() as f64;
    let (predicted, actual) = flatten_shares(&all_names, &groups);
    let share_rmse = rmse(&predicted, &actual)?;
    let mut headline = BTreeMap::from([
        ("accuracy".to_string(), accuracy),
        ("rmse".to_string(), share_rmse),
    ]);
    if let Ok(value) = nrmse(&predicted, &actual) {
        headline.insert("nrmse".to_string(), value);
    }

    let mut subset_reports = BTreeMap::new();
    for (name, members) in subsets {
        let member_refs: Vec<&String> = members.iter().collect();
        let correct = members.iter().filter(|m| groups[m.as_str()].correct).count();
        let (predicted, actual) = flatten_shares(&member_refs, &groups);
        subset_reports.insert(
            name.clone(),
            SubsetReport {
                groups: members.clone(),
                accuracy: correct as f64 / members.len().max(1) as f64,
                rmse: rmse(&predicted, &actual)?,
            },
        );
    }

    Ok((headline, EvaluationDetail::Election { groups, subsets: subset_reports }))
}

fn evaluate_news(
    plan: &SimulationPlan,
    results: &[AgentResult],
    truth_dimensions: &BTreeMap<String, super::truth::NewsDimensionTruth>,
) -> Result<(BTreeMap<String, f64>, EvaluationDetail)> {
    let aggregates = likert_aggregate(results, &plan.questionnaire)?;
    let mut dimensions = BTreeMap::new();
    let mut kl_sum = 0.0;
    let mut predicted_means = Vec::new();
    let mut true_means = Vec::new();
    for (name, truth) in truth_dimensions {
        let aggregate = aggregates.get(name).ok_or_else(|| {
            Error::Evaluation(format!("dimension '{name}' is not in the instrument"))
        })?;
        let kl = kl_divergence(&truth.distribution, &aggregate.distribution)?;
        kl_sum += kl;
        predicted_means.push(aggregate.mean);
        true_means.push(truth.mean);
        dimensions.insert(
            name.clone(),
            NewsDimensionReport {
                predicted_mean: aggregate.mean,
                true_mean: truth.mean,
                kl,
                predicted_distribution: aggregate.distribution.clone(),
                true_distribution: truth.distribution.clone(),
                samples: aggregate.samples,
            },
        );
    }
    let mut headline = BTreeMap::from([
        ("mean_kl".to_string(), kl_sum / dimensions.len() as f64),
        ("rmse".to_string(), rmse(&predicted_means, &true_means)?),
    ]);
    if let Ok(value) = nrmse(&predicted_means, &true_means) {
        headline.insert("nrmse".to_string(), value);
    }
    Ok((headline, EvaluationDetail::News { dimensions }))
}

/// Share maps in category order, as parallel vectors.
fn share_vectors(
    categories: &[String],
    predicted: &BTreeMap<String, f64>,
    actual: &BTreeMap<String, f64>,
) -> (Vec<f64>, Vec<f64>) {
    let p = categories.iter().map(|c| predicted.get(c).copied().unwrap_or(0.0)).collect();
    let a = categories.iter().map(|c| actual.get(c).copied().unwrap_or(0.0)).collect();
    (p, a)
}

fn evaluate_economic(
    plan: &SimulationPlan,
    results: &[AgentResult],
    overall: &BTreeMap<String, f64>,
    truth_groups: &BTreeMap<String, BTreeMap<String, f64>>,
    truth_subsets: &BTreeMap<String, Vec<String>>,
) -> Result<(BTreeMap<String, f64>, EvaluationDetail)> {
    let categories: Vec<String> = overall.keys().cloned().collect();
    let overall_shares = spending_aggregate(results, &plan.questionnaire, &categories)?;
    let (predicted, actual) = share_vectors(&categories, &overall_shares, overall);
    let mut headline = BTreeMap::from([
        ("kl".to_string(), kl_divergence(&actual, &predicted)?),
        ("rmse".to_string(), rmse(&predicted, &actual)?),
    ]);
    if let Ok(value) = nrmse(&predicted, &actual) {
        headline.insert("nrmse".to_string(), value);
    }

    // Score the agents belonging to `names` against `truth_shares`.
    let score = |names: &[&String], truth_shares: &BTreeMap<String, f64>, what: &str| {
        let members: Vec<AgentResult> = results
            .iter()
            .filter(|r| r.valid)
            .filter_map(|r| match group_of(plan, r) {
                Ok(Some(group)) if names.iter().any(|n| **n == group) => Some(Ok(r.clone())),
                Ok(_) => None,
                Err(e) => Some(Err(e)),
            })
            .collect::<Result<_>>()?;
        if members.is_empty() {
            return Err(Error::Evaluation(format!("no valid agents in {what}")));
        }
        let predicted_shares = spending_aggregate(&members, &plan.questionnaire, &categories)?;
        let (predicted, actual) = share_vectors(&categories, &predicted_shares, truth_shares);
        Ok(EconomicGroupReport {
            predicted: predicted_shares,
            actual: truth_shares.clone(),
            kl: kl_divergence(&actual, &predicted)?,
            rmse: rmse(&predicted, &actual)?,
            nrmse: nrmse(&predicted, &actual).ok(),
        })
    };

    let mut groups = BTreeMap::new();
    for (name, truth_shares) in truth_groups {
        let report = score(&[name], truth_shares, &format!("group '{name}'"))?;
        groups.insert(name.clone(), report);
    }

    let mut subsets = BTreeMap::new();
    for (name, members) in truth_subsets {
        // The subset's truth is the unweighted mean of its member groups'
        // shares (per-group populations are not part of the truth file).
        let mut mean_shares: BTreeMap<String, f64> = BTreeMap::new();
        for member in members {
            let shares = truth_groups.get(member).ok_or_else(|| {
                Error::Evaluation(format!(
                    "subset '{name}' references unknown group '{member}'"
                ))
            })?;
            for (category, value) in shares {
                *mean_shares.entry(category.clone()).or_insert(0.0) +=
                    value / members.len() as f64;
            }
        }
        let names: Vec<&String> = members.iter().collect();
        let report = score(&names, &mean_shares, &format!("subset '{name}'"))?;
        subsets.insert(name.clone(), report);
    }

    Ok((headline, EvaluationDetail::Economic { overall_shares, groups, subsets }))
}
