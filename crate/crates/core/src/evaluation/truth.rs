//! Ground-truth files the simulation output is scored against.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Real-world outcome for one election group: the winner and the vote
/// shares by option label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectionGroupTruth {
    pub winner: String,
    pub shares: BTreeMap<String, f64>,
}

/// Real-world aggregate for one attitude dimension: the mean answer and the
/// five-bin answer distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewsDimensionTruth {
    pub mean: f64,
    pub distribution: Vec<f64>,
}

/// Ground truth, tagged by scenario kind so a file cannot be scored against
/// the wrong pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroundTruth {
    Election {
        /// The vote question this truth applies to.
        question: String,
        groups: BTreeMap<String, ElectionGroupTruth>,
        /// Named subsets of groups reported separately (e.g. close races).
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        subsets: BTreeMap<String, Vec<String>>,
    },
    News {
        dimensions: BTreeMap<String, NewsDimensionTruth>,
    },
    Economic {
        /// Spending shares by category, nationally.
        overall: BTreeMap<String, f64>,
        /// Optional per-group spending shares.
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        groups: BTreeMap<String, BTreeMap<String, f64>>,
        /// Named subsets of groups reported separately (e.g. high-income
        /// regions); their truth shares are the mean of the member groups'.
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        subsets: BTreeMap<String, Vec<String>>,
    },
}

impl GroundTruth {
    pub fn load(path: impl AsRef<Path>) -> Result<GroundTruth> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::from(e).in_file(path))?;
        let truth: GroundTruth =
            serde_json::from_str(&text).map_err(|e| Error::from(e).in_file(path))?;
        truth.validate().map_err(|e| e.in_file(path))?;
        Ok(truth)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_vec_pretty(self)?;
        std::fs::write(path, json).map_err(|e| Error::from(e).in_file(path))
    }

    /// Structural checks: non-empty, finite, five-bin distributions, and
    /// subset references that resolve.
    pub fn validate(&self) -> Result<()> {
        match self {
            GroundTruth::Election { groups, subsets, .. } => {
                if groups.is_empty() {
                    return Err(Error::Evaluation("election truth has no groups".into()));
                }
                for (group, truth) in groups {
                    if !truth.shares.contains_key(&truth.winner) {
                        return Err(Error::Evaluation(format!(
                            "group '{group}': winner '{}' has no share entry",
                            truth.winner
                        )));
                    }
                    check_weights(truth.shares.values(), &format!("group '{group}' shares"))?;
                }
                for (name, members) in subsets {
                    for member in members {
                        if !groups.contains_key(member) {
                            return Err(Error::Evaluation(format!(
                                "subset '{name}' references unknown group '{member}'"
                            )));
                        }
                    }
                }
            }
            GroundTruth::News { dimensions } => {
                if dimensions.is_empty() {
                    return Err(Error::Evaluation("news truth has no dimensions".into()));
                }
                for (dimension, truth) in dimensions {
                    if truth.distribution.len() != 5 {
                        return Err(Error::Evaluation(format!(
                            "dimension '{dimension}': distribution must have 5 bins, got {}",
                            truth.distribution.len()
                        )));
                    }
                    check_weights(
                        truth.distribution.iter(),
                        &format!("dimension '{dimension}' distribution"),
                    )?;
                    if !truth.mean.is_finite() {
                        return Err(Error::Evaluation(format!(
                            "dimension '{dimension}': mean is not finite"
                        )));
                    }
                }
            }
            GroundTruth::Economic { overall, groups, subsets } => {
                if overall.is_empty() {
                    return Err(Error::Evaluation("economic truth has no categories".into()));
                }
                check_weights(overall.values(), "overall shares")?;
                for (group, shares) in groups {
                    if shares.keys().ne(overall.keys()) {
                        return Err(Error::Evaluation(format!(
                            "group '{group}' categories differ from the overall set"
                        )));
                    }
                    check_weights(shares.values(), &format!("group '{group}' shares"))?;
                }
                for (name, members) in subsets {
                    if members.is_empty() {
                        return Err(Error::Evaluation(format!("subset '{name}' is empty")));
                    }
                    for member in members {
                        if !groups.contains_key(member) {
                            return Err(Error::Evaluation(format!(
                                "subset '{name}' references unknown group '{member}'"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Scenario kind this truth belongs to.
    pub fn kind(&self) -> crate::scenario::ScenarioKind {
        match self {
            GroundTruth::Election { .. } => crate::scenario::ScenarioKind::Election,
            GroundTruth::News { .. } => crate::scenario::ScenarioKind::News,
            GroundTruth::Economic { .. } => crate::scenario::ScenarioKind::Economic,
        }
    }
}

fn check_weights<'a>(values: impl Iterator<Item = &'a f64>, what: &str) -> Result<()> {
    for &v in values {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::Evaluation(format!(
                "{what}: weights must be finite and non-negative"
            )));
        }
    }
    Ok(())
}
