//! Scenario engine: survey instruments, scenario configs, and plan building.
//!
//! A scenario config names an instrument, a user pool, a population recipe,
//! and context/ablation policy. [`validate_scenario`] cross-checks the config
//! against the files it references and returns findings instead of failing
//! fast; [`build_plan`] resolves everything into a [`SimulationPlan`] — the
//! single self-contained artifact a run consumes.

mod config;
mod plan;
mod questionnaire;

pub use config::{
    is_runnable, validate_scenario, AblationFlags, BackendRequirements, ContextPolicy, Finding,
    PopulationMethod, PopulationSpec, ScenarioConfig, ScenarioKind, Severity,
};
pub use plan::{build_plan, ContextBundle, SimulationPlan};
pub use questionnaire::{AnswerKind, Interval, Question, QuestionOption, Questionnaire};
