//! Survey instruments: questions, options, and structural validation.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// How a question expects to be answered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerKind {
    /// Exactly one option label.
    SingleChoice,
    /// One or more option labels.
    MultiChoice,
    /// A five-point agreement scale; options map to the values 1 through 5.
    #[serde(rename = "likert_1_5")]
    Likert1To5,
}

/// A numeric bracket attached to an option, e.g. an income or spending band.
///
/// Either end may be open. `midpoint` collapses the bracket to a single
/// representative value: the average when both ends are present, 1.25x the
/// lower bound for "X or more", and half the upper bound for "below X".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
}

impl Interval {
    /// Representative point value for the bracket.
    pub fn midpoint(&self) -> f64 {
        match (self.lo, self.hi) {
            (Some(lo), Some(hi)) => (lo + hi) / 2.0,
            (Some(lo), None) => lo * 1.25,
            (None, Some(hi)) => hi / 2.0,
            (None, None) => f64::NAN,
        }
    }

    fn validate(&self, where_: &str) -> Result<()> {
        match (self.lo, self.hi) {
            (None, None) => Err(Error::Questionnaire(format!(
                "{where_}: interval must have at least one bound"
            ))),
            (Some(lo), Some(hi)) if !(lo <= hi) => Err(Error::Questionnaire(format!(
                "{where_}: interval bounds out of order ({lo} > {hi})"
            ))),
            (lo, hi) => {
                for v in [lo, hi].into_iter().flatten() {
                    if !v.is_finite() {
                        return Err(Error::Questionnaire(format!(
                            "{where_}: interval bound must be finite"
                        )));
                    }
                }
                Ok(())
            }
        }
    }
}

/// One selectable option within a question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionOption {
    /// Short stable label the agent answers with ("A", "3", ...).
    pub label: String,
    /// Display text shown in the prompt.
    pub text: String,
    /// Numeric value for scale questions (1..=5 on the five-point scale).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numeric_value: Option<f64>,
    /// Numeric bracket for band questions (income, spending).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<Interval>,
}

/// A single survey question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub text: String,
    /// Reporting dimension this question belongs to (key in `dimension_map`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<String>,
    pub answer_kind: AnswerKind,
    pub options: Vec<QuestionOption>,
}

/// A full survey instrument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Questionnaire {
    pub id: String,
    /// Instrument language tag ("EN", "ZH", ...).
    pub language: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
    pub questions: Vec<Question>,
    /// Reporting dimensions -> the question ids that feed each one.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub dimension_map: BTreeMap<String, Vec<String>>,
}

impl Questionnaire {
    /// Parse an instrument from a JSON file and validate it.
    pub fn load(path: impl AsRef<Path>) -> Result<Questionnaire> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::from(e).in_file(path))?;
        let q: Questionnaire =
            serde_json::from_str(&text).map_err(|e| Error::from(e).in_file(path))?;
        q.validate().map_err(|e| e.in_file(path))?;
        Ok(q)
    }

    /// Look up a question by id.
    pub fn question(&self, id: &str) -> Option<&Question> {
        self.questions.iter().find(|q| q.id == id)
    }

    /// Structural checks: unique ids and labels, well-formed scales and
    /// brackets, and a dimension map consistent with the question list.
    pub fn validate(&self) -> Result<()> {
        if self.questions.is_empty() {
            return Err(Error::Questionnaire(format!(
                "instrument '{}' has no questions",
                self.id
            )));
        }
        let mut seen = BTreeSet::new();
        for q in &self.questions {
            if !seen.insert(q.id.as_str()) {
                return Err(Error::Questionnaire(format!(
                    "duplicate question id '{}'",
                    q.id
                )));
            }
            q.validate()?;
        }
        // Every mapped id must exist, and every question with a dimension
        // must appear under that dimension.
        for (dim, ids) in &self.dimension_map {
            for id in ids {
                if !seen.contains(id.as_str()) {
                    return Err(Error::Questionnaire(format!(
                        "dimension '{dim}' references unknown question '{id}'"
                    )));
                }
            }
        }
        for q in &self.questions {
            if let Some(dim) = &q.dimension {
                let mapped = self
                    .dimension_map
                    .get(dim)
                    .is_some_and(|ids| ids.iter().any(|id| id == &q.id));
                if !mapped {
                    return Err(Error::Questionnaire(format!(
                        "question '{}' declares dimension '{dim}' but the dimension map does not list it",
                        q.id
                    )));
                }
            }
        }
        Ok(())
    }
}

impl Question {
    fn validate(&self) -> Result<()> {
        let mut labels = BTreeSet::new();
        for opt in &self.options {
            if opt.label.trim().is_empty() {
                return Err(Error::Questionnaire(format!(
                    "question '{}' has an option with an empty label",
                    self.id
                )));
            }
            if !labels.insert(opt.label.as_str()) {
                return Err(Error::Questionnaire(format!(
                    "question '{}' repeats option label '{}'",
                    self.id, opt.label
                )));
            }
            if let Some(iv) = &opt.interval {
                iv.validate(&format!("question '{}' option '{}'", self.id, opt.label))?;
            }
        }
        match self.answer_kind {
            AnswerKind::Likert1To5 => {
                if self.options.len() != 5 {
                    return Err(Error::Questionnaire(format!(
                        "question '{}' is a five-point scale but has {} options",
                        self.id,
                        self.options.len()
                    )));
                }
                let values: BTreeSet<i64> = self
                    .options
                    .iter()
                    .filter_map(|o| o.numeric_value)
                    .filter(|v| v.fract() == 0.0)
                    .map(|v| v as i64)
                    .collect();
                if values != BTreeSet::from([1, 2, 3, 4, 5]) {
                    return Err(Error::Questionnaire(format!(
                        "question '{}' scale options must carry the numeric values 1 through 5",
                        self.id
                    )));
                }
            }
            AnswerKind::SingleChoice | AnswerKind::MultiChoice => {
                if self.options.len() < 2 {
                    return Err(Error::Questionnaire(format!(
                        "question '{}' needs at least two options",
                        self.id
                    )));
                }
            }
        }
        Ok(())
    }
}
