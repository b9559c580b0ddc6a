//! Prompt rendering and tolerant response parsing.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::scenario::{AnswerKind, ContextBundle, Question, Questionnaire};
use crate::synthesis::AgentProfile;

/// One parsed answer. Scale questions carry their numeric value, choice
/// questions the selected option label(s). Serializes as the bare JSON value
/// (number, string, or array of strings).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnswerValue {
    Number(f64),
    Label(String),
    Labels(Vec<String>),
}

/// Everything the parser could make of a response. Parsing is total: any
/// input yields an outcome, with problems describing what was ignored,
/// repeated, illegal, or missing.
#[derive(Debug, Clone, Default)]
pub struct ParseOutcome {
    pub answers: BTreeMap<String, AnswerValue>,
    pub problems: Vec<String>,
}

impl ParseOutcome {
    /// True when every question in the instrument has an answer.
    pub fn is_complete(&self, questionnaire: &Questionnaire) -> bool {
        questionnaire
            .questions
            .iter()
            .all(|q| self.answers.contains_key(&q.id))
    }
}

/// Render the full prompt for one agent: persona, context material (when
/// any), the survey, and the output contract the parser expects.
pub fn render_prompt(
    agent: &AgentProfile,
    context: &ContextBundle,
    questionnaire: &Questionnaire,
) -> String {
    let mut out = String::new();
    out.push_str(
        "You are role-playing a real social-media user taking part in a survey. \
         Stay in character and answer every question as this person would.\n",
    );

    out.push_str("\n## Who you are\n");
    for (key, value) in &agent.attributes {
        let _ = writeln!(out, "- {key}: {value}");
    }
    if let Some(income) = agent.income {
        let _ = writeln!(out, "- monthly income: {income:.2}");
    }

    if !context.posts.is_empty() {
        out.push_str("\n## Your recent posts (newest first)\n<<<\n");
        for post in &context.posts {
            let _ = writeln!(out, "- {post}");
        }
        out.push_str(">>>\n");
    }
    if let Some(extra) = &context.extra {
        out.push_str("\n## Background\n<<<\n");
        out.push_str(extra);
        out.push_str("\n>>>\n");
    }

    out.push_str("\n## Survey\n");
    for q in &questionnaire.questions {
        let _ = writeln!(out, "\n{}. {}", q.id, q.text);
        for opt in &q.options {
            let _ = writeln!(out, "  {}. {}", opt.label, opt.text);
        }
        let hint = match q.answer_kind {
            AnswerKind::SingleChoice => "(select exactly one option)",
            AnswerKind::MultiChoice => "(select one or more options)",
            AnswerKind::Likert1To5 => "(rate your agreement on the 1-5 scale)",
        };
        let _ = writeln!(out, "  {hint}");
    }

    out.push_str(
        "\n## How to answer\n\
         Reply with one line per question, in the form `<question id>: <option label>`.\n\
         For multi-choice questions, join labels with commas.\n\
         Required lines:\n",
    );
    for q in &questionnaire.questions {
        let placeholder = match q.answer_kind {
            AnswerKind::SingleChoice => "<label>",
            AnswerKind::MultiChoice => "<label, label, ...>",
            AnswerKind::Likert1To5 => "<1-5>",
        };
        let _ = writeln!(out, "{}: {placeholder}", q.id);
    }
    out
}

/// Strip decoration a model might wrap a token in: whitespace, quotes,
/// backticks, list bullets, and a trailing period.
fn scrub(token: &str) -> String {
    let t = token
        .trim()
        .trim_start_matches(['-', '*', '`', '"', '\''])
        .trim_end_matches(['`', '"', '\'', '.'])
        .trim();
    t.to_lowercase()
}

/// Find the option a token refers to: exact label, exact display text, the
/// numeric scale value, or a label followed by a separator and trailing text
/// (e.g. "B) Candidate Beta"). Returns the option's position.
fn match_option(question: &Question, token: &str) -> Option<usize> {
    let t = scrub(token);
    if t.is_empty() {
        return None;
    }
    for (pos, opt) in question.options.iter().enumerate() {
        if t == opt.label.to_lowercase() {
            return Some(pos);
        }
    }
    for (pos, opt) in question.options.iter().enumerate() {
        if t == opt.text.to_lowercase() {
            return Some(pos);
        }
    }
    if question.answer_kind == AnswerKind::Likert1To5 {
        if let Ok(k) = t.parse::<f64>() {
            if let Some(pos) = question
                .options
                .iter()
                .position(|o| o.numeric_value == Some(k))
            {
                return Some(pos);
            }
        }
    }
    // Label plus a non-alphanumeric separator and anything after it.
    for (pos, opt) in question.options.iter().enumerate() {
        let label = opt.label.to_lowercase();
        if let Some(rest) = t.strip_prefix(&label) {
            if rest.chars().next().is_some_and(|c| !c.is_alphanumeric()) {
                return Some(pos);
            }
        }
    }
    None
}

fn answer_for(question: &Question, value: &str, problems: &mut Vec<String>) -> Option<AnswerValue> {
    match question.answer_kind {
        AnswerKind::SingleChoice => match match_option(question, value) {
            Some(pos) => Some(AnswerValue::Label(question.options[pos].label.clone())),
            None => {
                problems.push(format!(
                    "{}: '{}' matches no option",
                    question.id,
                    value.trim()
                ));
                None
            }
        },
        AnswerKind::Likert1To5 => match match_option(question, value) {
            Some(pos) => {
                let opt = &question.options[pos];
                Some(AnswerValue::Number(
                    opt.numeric_value.unwrap_or((pos + 1) as f64),
                ))
            }
            None => {
                problems.push(format!(
                    "{}: '{}' is not on the 1-5 scale",
                    question.id,
                    value.trim()
                ));
                None
            }
        },
        AnswerKind::MultiChoice => {
            let mut positions = Vec::new();
            for token in value.split(',') {
                if scrub(token).is_empty() {
                    continue;
                }
                match match_option(question, token) {
                    Some(pos) => {
                        if !positions.contains(&pos) {
                            positions.push(pos);
                        }
                    }
                    None => problems.push(format!(
                        "{}: '{}' matches no option",
                        question.id,
                        token.trim()
                    )),
                }
            }
            if positions.is_empty() {
                return None;
            }
            positions.sort_unstable();
            Some(AnswerValue::Labels(
                positions
                    .into_iter()
                    .map(|pos| question.options[pos].label.clone())
                    .collect(),
            ))
        }
    }
}

/// Parse a raw response against an instrument.
///
/// Accepts `<question id>: <value>` lines with generous slack: ids match
/// case-insensitively, values may be option labels, option texts, scale
/// digits, or a label with trailing text. Lines without a colon are treated
/// as chatter and skipped; unknown ids, illegal values, repeats, and
/// unanswered questions are recorded as problems. The last well-formed
/// answer for a question wins.
pub fn parse_response(text: &str, questionnaire: &Questionnaire) -> ParseOutcome {
    let mut outcome = ParseOutcome::default();
    for line in text.lines() {
        let Some((left, right)) = line.split_once(':') else {
            continue;
        };
        let qid_token = scrub(left);
        if qid_token.is_empty() {
            continue;
        }
        let Some(question) = questionnaire
            .questions
            .iter()
            .find(|q| q.id.to_lowercase() == qid_token)
        else {
            outcome
                .problems
                .push(format!("unknown question id '{}'", left.trim()));
            continue;
        };
        if let Some(answer) = answer_for(question, right, &mut outcome.problems) {
            if outcome.answers.insert(question.id.clone(), answer).is_some() {
                outcome
                    .problems
                    .push(format!("{}: answered more than once; keeping the last", question.id));
            }
        }
    }
    for q in &questionnaire.questions {
        if !outcome.answers.contains_key(&q.id) {
            outcome.problems.push(format!("{}: unanswered", q.id));
        }
    }
    outcome
}
