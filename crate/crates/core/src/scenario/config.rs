//! Scenario configuration files and their validation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::pool::load_schema;
use crate::{Error, Result};

use super::Questionnaire;

/// The three supported simulation scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Election,
    News,
    Economic,
}

/// How the agent population is synthesized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PopulationMethod {
    /// Fit a joint table to marginal targets, then sample from it.
    Ipf,
    /// Reproduce the empirical joint distribution of a reference subset.
    Ids,
    /// Allocate agents to regions by population and draw incomes per region.
    Regional,
}

/// Population block of a scenario config. Paths are relative to the config
/// file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSpec {
    pub method: PopulationMethod,
    pub size: usize,
    /// Demographic attributes the synthetic profiles carry.
    pub attributes: Vec<String>,
    /// Marginal targets file (ipf).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<PathBuf>,
    /// Optional joint seed table file (ipf); uniform seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_table: Option<PathBuf>,
    /// Label predicate selecting the reference subset (ids). An empty map
    /// selects the whole pool.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<BTreeMap<String, String>>,
    /// Fall back to with-replacement draws when a stratum runs dry (ids).
    #[serde(default)]
    pub allow_replacement: bool,
    /// Region roster file (regional).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regions: Option<PathBuf>,
    /// Income mixture settings (regional); defaults used when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub income: Option<crate::synthesis::RegionalIncomeConfig>,
}

/// What goes into each agent's context window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextPolicy {
    /// Attach the matched pool user's recent posts.
    pub include_posts: bool,
    /// How many posts at most, newest first.
    #[serde(default = "default_max_posts")]
    pub max_posts: usize,
    /// Optional text file injected into every agent's context (e.g. a news
    /// event description).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra_context: Option<PathBuf>,
}

fn default_max_posts() -> usize {
    10
}

impl Default for ContextPolicy {
    fn default() -> Self {
        ContextPolicy { include_posts: true, max_posts: default_max_posts(), extra_context: None }
    }
}

/// Ablation switches. Both default off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AblationFlags {
    /// Strip all user-derived context (posts and extra text) from prompts.
    #[serde(default)]
    pub no_knowledge: bool,
    /// Replace the fitted demographic distribution with a uniform one.
    #[serde(default)]
    pub random_demographics: bool,
}

/// Generation settings forwarded to the agent backend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackendRequirements {
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
}

fn default_temperature() -> f64 {
    0.7
}

fn default_max_tokens() -> u32 {
    2048
}

impl Default for BackendRequirements {
    fn default() -> Self {
        BackendRequirements { temperature: default_temperature(), max_tokens: default_max_tokens() }
    }
}

/// A scenario config file: everything needed to plan one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario_id: String,
    pub kind: ScenarioKind,
    /// Survey instrument file.
    pub questionnaire: PathBuf,
    /// User pool (JSONL) and its attribute schema.
    pub pool: PathBuf,
    pub schema: PathBuf,
    pub population: PopulationSpec,
    #[serde(default)]
    pub context: ContextPolicy,
    /// Attribute whose value groups agents for reporting (e.g. a region).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_key: Option<String>,
    /// Question whose answers decide the headline outcome (election).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vote_question: Option<String>,
    /// Ground-truth file used by the evaluation stage.
    pub ground_truth: PathBuf,
    #[serde(default)]
    pub ablation: AblationFlags,
    #[serde(default)]
    pub backend: BackendRequirements,
}

impl ScenarioConfig {
    /// Parse a scenario config from a JSON file (no cross-file checks; see
    /// [`validate_scenario`]).
    pub fn load(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::from(e).in_file(path))?;
        serde_json::from_str(&text).map_err(|e| Error::from(e).in_file(path))
    }
}

/// Severity of a validation finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    /// The scenario cannot run until this is fixed.
    Error,
    /// The scenario can run, but something looks off.
    Warning,
}

/// One validation finding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub severity: Severity,
    pub message: String,
}

impl Finding {
    fn error(message: impl Into<String>) -> Finding {
        Finding { severity: Severity::Error, message: message.into() }
    }

    fn warning(message: impl Into<String>) -> Finding {
        Finding { severity: Severity::Warning, message: message.into() }
    }
}

/// True when no finding blocks the run.
pub fn is_runnable(findings: &[Finding]) -> bool {
    findings.iter().all(|f| f.severity != Severity::Error)
}

/// Cross-check a scenario config against the files it references.
///
/// Returns all findings rather than stopping at the first, so a user can fix
/// a config in one pass. Only `Error` findings block planning; a missing
/// ground-truth file, for example, is a warning because it is needed only at
/// evaluation time.
pub fn validate_scenario(config: &ScenarioConfig, base_dir: impl AsRef<Path>) -> Vec<Finding> {
    let base = base_dir.as_ref();
    let mut findings = Vec::new();

    if config.population.size == 0 {
        findings.push(Finding::error("population size must be at least 1"));
    }
    if config.population.attributes.is_empty() {
        findings.push(Finding::error("population attribute list is empty"));
    }

    // group_key must be one of the attributes the profiles will carry.
    if let Some(key) = &config.group_key {
        if !config.population.attributes.iter().any(|a| a == key) {
            findings.push(Finding::error(format!(
                "group_key '{key}' is not in the population attribute set"
            )));
        }
    }

    // Method-specific required inputs.
    match config.population.method {
        PopulationMethod::Ipf => {
            if config.population.targets.is_none() {
                findings.push(Finding::error("ipf population needs a targets file"));
            }
        }
        PopulationMethod::Ids => {
            if config.population.reference.is_none() {
                findings.push(Finding::error(
                    "ids population needs a reference predicate (use {} for the whole pool)",
                ));
            }
        }
        PopulationMethod::Regional => {
            if config.population.regions.is_none() {
                findings.push(Finding::error("regional population needs a regions file"));
            }
            if config.ablation.random_demographics {
                findings.push(Finding::warning(
                    "random_demographics has no effect on regional populations; the region \
                     allocation is already fixed by the roster",
                ));
            }
        }
    }

    if config.context.include_posts && config.context.max_posts == 0 {
        findings.push(Finding::warning(
            "include_posts is on but max_posts is 0; contexts will be empty",
        ));
    }

    // Referenced files. The ground truth is only needed at evaluation time.
    let mut require = vec![
        ("questionnaire", config.questionnaire.clone()),
        ("pool", config.pool.clone()),
        ("schema", config.schema.clone()),
    ];
    if let Some(p) = &config.population.targets {
        require.push(("targets", p.clone()));
    }
    if let Some(p) = &config.population.seed_table {
        require.push(("seed_table", p.clone()));
    }
    if let Some(p) = &config.population.regions {
        require.push(("regions", p.clone()));
    }
    if let Some(p) = &config.context.extra_context {
        require.push(("extra_context", p.clone()));
    }
    for (what, rel) in require {
        let path = base.join(&rel);
        if !path.is_file() {
            findings.push(Finding::error(format!(
                "{what} file not found: {}",
                path.display()
            )));
        }
    }
    let truth = base.join(&config.ground_truth);
    if !truth.is_file() {
        findings.push(Finding::warning(format!(
            "ground-truth file not found yet: {} (needed only for evaluation)",
            truth.display()
        )));
    }

    // Schema-level checks for attribute-driven methods.
    if matches!(config.population.method, PopulationMethod::Ipf | PopulationMethod::Ids) {
        if let Ok(schema) = load_schema(base.join(&config.schema)) {
            let known: Vec<&str> = schema.iter().map(|a| a.name.as_str()).collect();
            for attr in &config.population.attributes {
                if !known.contains(&attr.as_str()) {
                    findings.push(Finding::error(format!(
                        "population attribute '{attr}' is not in the schema"
                    )));
                }
            }
            if let Some(reference) = &config.population.reference {
                for attr in reference.keys() {
                    if !known.contains(&attr.as_str()) {
                        findings.push(Finding::error(format!(
                            "reference predicate attribute '{attr}' is not in the schema"
                        )));
                    }
                }
            }
        }
    }

    // Instrument checks.
    match Questionnaire::load(base.join(&config.questionnaire)) {
        Ok(q) => {
            if !q.language.eq_ignore_ascii_case("en") {
                findings.push(Finding::warning(format!(
                    "instrument language is '{}' but prompts are rendered in English",
                    q.language
                )));
            }
            if config.kind == ScenarioKind::Election {
                match &config.vote_question {
                    None => findings.push(Finding::error(
                        "election scenarios must name a vote_question",
                    )),
                    Some(id) => match q.question(id) {
                        None => findings.push(Finding::error(format!(
                            "vote_question '{id}' is not in the instrument"
                        ))),
                        Some(question) => {
                            if question.answer_kind != super::AnswerKind::SingleChoice {
                                findings.push(Finding::error(format!(
                                    "vote_question '{id}' must be single_choice"
                                )));
                            }
                        }
                    },
                }
            }
        }
        Err(e) => {
            // Only reachable when the file exists but is malformed; a missing
            // file was already reported above.
            if base.join(&config.questionnaire).is_file() {
                findings.push(Finding::error(format!("instrument invalid: {e}")));
            }
        }
    }

    findings
}
