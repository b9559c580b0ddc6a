//! The simulation runner: drives a plan's agents through a backend with a
//! worker pool, retries, and abort handling.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::scenario::{ScenarioKind, SimulationPlan};
use crate::{Error, Result};

use super::backend::{AgentBackend, CallError};
use super::prompt::{parse_response, render_prompt, AnswerValue};

/// Runner knobs. Defaults: four workers, three attempts per agent, 1s base
/// backoff doubling per retry.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub concurrency: usize,
    pub max_attempts: u32,
    pub initial_backoff_ms: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { concurrency: 4, max_attempts: 3, initial_backoff_ms: 1000 }
    }
}

/// One agent's outcome. `valid` means every question got a legal answer;
/// invalid agents keep whatever partial answers parsed, plus the parser's
/// problem notes, with the full retry budget spent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentResult {
    pub agent_id: String,
    pub valid: bool,
    pub attempts_used: u32,
    pub answers: BTreeMap<String, AnswerValue>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub problems: Vec<String>,
}

/// Summary of a run, written next to the results. Deliberately carries no
/// timestamps: two runs of the same plan on the same backend produce
/// byte-identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario_id: String,
    pub kind: ScenarioKind,
    pub seed: u64,
    pub backend: String,
    pub concurrency: usize,
    /// SHA-256 of the plan this run executed.
    pub plan_hash: String,
    pub population: usize,
    /// Agents with fully valid answer sheets.
    pub completed: usize,
    /// Agents whose answers never parsed completely.
    pub invalid: usize,
    pub aborted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abort_reason: Option<String>,
}

/// Results (plan order) plus the manifest.
#[derive(Debug)]
pub struct RunOutput {
    pub results: Vec<AgentResult>,
    pub manifest: RunManifest,
}

enum WorkerMessage {
    Done(usize, AgentResult),
    Abort(String),
}

/// Process one agent: up to `max_attempts` backend calls with exponential
/// backoff. Transient transport failures retry; exhausting the budget on
/// transport is an abort. Content that will not parse completely also
/// retries, but exhaustion there yields an invalid result, not an abort.
fn drive_agent(
    index: usize,
    plan: &SimulationPlan,
    backend: &dyn AgentBackend,
    options: &RunOptions,
) -> std::result::Result<AgentResult, String> {
    let agent = &plan.population[index];
    let prompt = render_prompt(agent, &plan.contexts[index], &plan.questionnaire);
    let mut last_problems = Vec::new();
    let mut last_answers = BTreeMap::new();
    for attempt in 1..=options.max_attempts {
        match backend.complete(&prompt, agent, plan) {
            Ok(text) => {
                let outcome = parse_response(&text, &plan.questionnaire);
                if outcome.is_complete(&plan.questionnaire) {
                    return Ok(AgentResult {
                        agent_id: agent.agent_id.clone(),
                        valid: true,
                        attempts_used: attempt,
                        answers: outcome.answers,
                        problems: outcome.problems,
                    });
                }
                last_problems = outcome.problems;
                last_answers = outcome.answers;
            }
            Err(CallError::Fatal(message)) => {
                return Err(format!("agent {}: {message}", agent.agent_id));
            }
            Err(CallError::Retryable(message)) => {
                if attempt == options.max_attempts {
                    return Err(format!(
                        "agent {}: giving up after {attempt} attempts: {message}",
                        agent.agent_id
                    ));
                }
            }
        }
        if attempt < options.max_attempts {
            let backoff = options.initial_backoff_ms.saturating_mul(1 << (attempt - 1));
            std::thread::sleep(Duration::from_millis(backoff));
        }
    }
    Ok(AgentResult {
        agent_id: agent.agent_id.clone(),
        valid: false,
        attempts_used: options.max_attempts,
        answers: last_answers,
        problems: last_problems,
    })
}

/// Run every agent in the plan through the backend.
///
/// Workers pull agent indices from a shared counter, so results complete in
/// nondeterministic order; `on_result` observes that completion order (for
/// streaming to disk), while the returned vector is sorted back into plan
/// order. A fatal backend error (or a transport failure that survives the
/// whole retry budget) aborts the run: in-flight agents finish, no new ones
/// start, and the manifest records the reason. Already-completed results are
/// kept so partial work is never thrown away.
pub fn run_simulation(
    plan: &SimulationPlan,
    backend: &dyn AgentBackend,
    options: &RunOptions,
    mut on_result: impl FnMut(&AgentResult),
) -> Result<RunOutput> {
    if plan.population.len() != plan.contexts.len() {
        return Err(Error::Scenario(format!(
            "plan is inconsistent: {} agents but {} context bundles",
            plan.population.len(),
            plan.contexts.len()
        )));
    }
    let n = plan.population.len();
    let workers = options.concurrency.clamp(1, n.max(1));
    let next_index = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);

    let mut indexed: Vec<(usize, AgentResult)> = Vec::with_capacity(n);
    let mut abort_reason: Option<String> = None;

    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel::<WorkerMessage>();
        for _ in 0..workers {
            let tx = tx.clone();
            let next_index = &next_index;
            let abort = &abort;
            scope.spawn(move || loop {
                if abort.load(Ordering::SeqCst) {
                    break;
                }
                let index = next_index.fetch_add(1, Ordering::SeqCst);
                if index >= n {
                    break;
                }
                match drive_agent(index, plan, backend, options) {
                    Ok(result) => {
                        if tx.send(WorkerMessage::Done(index, result)).is_err() {
                            break;
                        }
                    }
                    Err(reason) => {
                        abort.store(true, Ordering::SeqCst);
                        let _ = tx.send(WorkerMessage::Abort(reason));
                        break;
                    }
                }
            });
        }
        drop(tx);
        while let Ok(message) = rx.recv() {
            match message {
                WorkerMessage::Done(index, result) => {
                    on_result(&result);
                    indexed.push((index, result));
                }
                WorkerMessage::Abort(reason) => {
                    if abort_reason.is_none() {
                        abort_reason = Some(reason);
                    }
                }
            }
        }
    });

    indexed.sort_by_key(|(index, _)| *index);
    let results: Vec<AgentResult> = indexed.into_iter().map(|(_, r)| r).collect();
    let completed = results.iter().filter(|r| r.valid).count();
    let invalid = results.len() - completed;
    let manifest = RunManifest {
        scenario_id: plan.scenario_id.clone(),
        kind: plan.kind,
        seed: plan.seed,
        backend: backend.name(),
        concurrency: workers,
        plan_hash: plan.content_hash(),
        population: n,
        completed,
        invalid,
        aborted: abort_reason.is_some(),
        abort_reason,
    };
    Ok(RunOutput { results, manifest })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_options_are_production_shaped() {
        let options = RunOptions::default();
        assert_eq!(options.max_attempts, 3);
        assert_eq!(options.initial_backoff_ms, 1000);
        assert!(options.concurrency >= 1);
    }

    #[test]
    fn agent_result_serializes_compactly() {
        let result = AgentResult {
            agent_id: "agent-000000".into(),
            valid: true,
            attempts_used: 1,
            answers: BTreeMap::from([("Q01".to_string(), AnswerValue::Label("A".into()))]),
            problems: Vec::new(),
        };
        let json = serde_json::to_string(&result).unwrap();
        assert!(!json.contains("problems"), "empty problems omitted: {json}");
        let back: AgentResult = serde_json::from_str(&json).unwrap();
        assert_eq!(back, result);
    }
}
