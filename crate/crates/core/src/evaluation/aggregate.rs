//! Turning raw agent answers into group-level aggregates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::behavior::{AgentResult, AnswerValue};
use crate::scenario::{AnswerKind, Question, Questionnaire};
use crate::{Error, Result};

/// Outcome of a winner-takes-all call in one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinnerCall {
    pub winner: String,
    /// Vote shares by label, over the group's votes.
    pub shares: BTreeMap<String, f64>,
    /// The top count was shared; the lexicographically smallest label won.
    pub tied: bool,
}

/// Call a winner per group by plurality. Ties break toward the
/// lexicographically smaller label and are flagged, never hidden.
pub fn winner_takes_all(
    votes_by_group: &BTreeMap<String, Vec<String>>,
) -> Result<BTreeMap<String, WinnerCall>> {
    let mut calls = BTreeMap::new();
    for (group, votes) in votes_by_group {
        if votes.is_empty() {
            return Err(Error::Evaluation(format!("group '{group}' has no votes")));
        }
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for vote in votes {
            *counts.entry(vote).or_insert(0) += 1;
        }
        // BTreeMap iterates labels in order, so the first max is the
        // lexicographically smallest among tied labels.
        let (winner, top) = counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(label, count)| (label.to_string(), *count))
            .expect("non-empty votes");
        let tied = counts.values().filter(|&&c| c == top).count() > 1;
        let total = votes.len() as f64;
        let shares = counts
            .into_iter()
            .map(|(label, count)| (label.to_string(), count as f64 / total))
            .collect();
        calls.insert(group.clone(), WinnerCall { winner, shares, tied });
    }
    Ok(calls)
}

/// Aggregate of one reporting dimension of scale questions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LikertDimension {
    /// Mean of all (agent, question) numeric answers in the dimension.
    pub mean: f64,
    /// Share of answers in each of the five scale bins.
    pub distribution: Vec<f64>,
    /// How many (agent, question) samples fed the aggregate.
    pub samples: usize,
}

/// Aggregate scale answers per reporting dimension.
///
/// Only valid agents contribute. Every question mapped into a dimension must
/// be a five-point scale question.
pub fn likert_aggregate(
    results: &[AgentResult],
    questionnaire: &Questionnaire,
) -> Result<BTreeMap<String, LikertDimension>> {
    let mut out = BTreeMap::new();
    for (dimension, question_ids) in &questionnaire.dimension_map {
        let mut bins = [0usize; 5];
        let mut sum = 0.0;
        let mut samples = 0usize;
        for qid in question_ids {
            let question = questionnaire.question(qid).ok_or_else(|| {
                Error::Evaluation(format!("dimension '{dimension}' references unknown '{qid}'"))
            })?;
            if question.answer_kind != AnswerKind::Likert1To5 {
                return Err(Error::Evaluation(format!(
                    "dimension '{dimension}' question '{qid}' is not a scale question"
                )));
            }
            for result in results.iter().filter(|r| r.valid) {
                let Some(answer) = result.answers.get(qid) else {
                    continue;
                };
                let AnswerValue::Number(value) = answer else {
                    return Err(Error::Evaluation(format!(
                        "agent '{}' answer to '{qid}' is not numeric",
                        result.agent_id
                    )));
                };
                let bin = value.round() as i64;
                if !(1..=5).contains(&bin) {
                    return Err(Error::Evaluation(format!(
                        "agent '{}' answer to '{qid}' is off the 1-5 scale: {value}",
                        result.agent_id
                    )));
                }
                bins[(bin - 1) as usize] += 1;
                sum += value;
                samples += 1;
            }
        }
        if samples == 0 {
            return Err(Error::Evaluation(format!(
                "dimension '{dimension}' has no valid answers to aggregate"
            )));
        }
        out.insert(
            dimension.clone(),
            LikertDimension {
                mean: sum / samples as f64,
                distribution: bins.iter().map(|&c| c as f64 / samples as f64).collect(),
                samples,
            },
        );
    }
    Ok(out)
}

/// The numeric value one answer contributes to a spending category: bracket
/// midpoints for chosen options, the raw value for numeric answers.
fn answer_amount(question: &Question, answer: &AnswerValue, agent_id: &str) -> Result<f64> {
    let midpoint_of = |label: &str| -> Result<f64> {
        let option = question
            .options
            .iter()
            .find(|o| o.label == label)
            .ok_or_else(|| {
                Error::Evaluation(format!(
                    "agent '{agent_id}' picked unknown option '{label}' on '{}'",
                    question.id
                ))
            })?;
        let interval = option.interval.as_ref().ok_or_else(|| {
            Error::Evaluation(format!(
                "option '{label}' of '{}' carries no bracket to take a midpoint of",
                question.id
            ))
        })?;
        Ok(interval.midpoint())
    };
    match answer {
        AnswerValue::Number(v) => Ok(*v),
        AnswerValue::Label(label) => midpoint_of(label),
        AnswerValue::Labels(labels) => {
            let mut sum = 0.0;
            for label in labels {
                sum += midpoint_of(label)?;
            }
            Ok(sum)
        }
    }
}

/// Average per-agent spending shares over the given categories.
///
/// Each valid agent's answers are collapsed to one amount per category
/// (bracket midpoints summed across the category's questions) and normalized
/// into a share vector; the share vectors are then averaged across agents.
/// Agents missing a category answer, or with zero total, are excluded.
pub fn spending_aggregate(
    results: &[AgentResult],
    questionnaire: &Questionnaire,
    categories: &[String],
) -> Result<BTreeMap<String, f64>> {
    if categories.is_empty() {
        return Err(Error::Evaluation("no spending categories given".into()));
    }
    for category in categories {
        if !questionnaire.dimension_map.contains_key(category) {
            return Err(Error::Evaluation(format!(
                "category '{category}' is not a dimension of the instrument"
            )));
        }
    }
    let mut sums: BTreeMap<&str, f64> =
        categories.iter().map(|c| (c.as_str(), 0.0)).collect();
    let mut used = 0usize;
    'agents: for result in results.iter().filter(|r| r.valid) {
        let mut amounts = Vec::with_capacity(categories.len());
        for category in categories {
            let mut amount = 0.0;
            for qid in &questionnaire.dimension_map[category] {
                let question = questionnaire
                    .question(qid)
                    .ok_or_else(|| Error::Evaluation(format!("unknown question '{qid}'")))?;
                let Some(answer) = result.answers.get(qid) else {
                    continue 'agents;
                };
                amount += answer_amount(question, answer, &result.agent_id)?;
            }
            amounts.push(amount);
        }
        let total: f64 = amounts.iter().sum();
        if total <= 0.0 {
            continue;
        }
        for (category, amount) in categories.iter().zip(&amounts) {
            *sums.get_mut(category.as_str()).expect("preseeded") += amount / total;
        }
        used += 1;
    }
    if used == 0 {
        return Err(Error::Evaluation(
            "no valid agent produced a usable spending share vector".into(),
        ));
    }
    Ok(sums
        .into_iter()
        .map(|(category, sum)| (category.to_string(), sum / used as f64))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn winner_majority_beats_lexicographic_order() {
        // "Z" has the majority; the tie-break toward smaller labels must not
        // override an actual majority.
        let groups = BTreeMap::from([(
            "g".to_string(),
            vec!["Z".to_string(), "Z".to_string(), "A".to_string()],
        )]);
        let calls = winner_takes_all(&groups).unwrap();
        assert_eq!(calls["g"].winner, "Z");
        assert!(!calls["g"].tied);
    }

    #[test]
    fn three_way_tie_flags_and_picks_smallest() {
        let groups = BTreeMap::from([(
            "g".to_string(),
            vec!["C".to_string(), "B".to_string(), "A".to_string()],
        )]);
        let calls = winner_takes_all(&groups).unwrap();
        assert_eq!(calls["g"].winner, "A");
        assert!(calls["g"].tied);
    }
}
