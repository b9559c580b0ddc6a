//! Agent behavior: prompt rendering, response parsing, backends, and the
//! concurrent simulation runner.
//!
//! A [`SimulationPlan`](crate::scenario::SimulationPlan) is executed by
//! [`run_simulation`] against an [`AgentBackend`] — either the [`RuleOracle`]
//! (deterministic, offline) or [`HttpLlm`] (a chat-completions endpoint).
//! Both produce raw text that flows through the same tolerant parser, so the
//! whole pipeline downstream of the backend is identical in tests and in
//! production.

mod backend;
mod prompt;
mod runner;

pub use backend::{
    rule_oracle_pick, AgentBackend, CallError, HttpLlm, HttpLlmConfig, RuleOracle, API_KEY_ENV,
};
pub use prompt::{parse_response, render_prompt, AnswerValue, ParseOutcome};
pub use runner::{run_simulation, AgentResult, RunManifest, RunOptions, RunOutput};
