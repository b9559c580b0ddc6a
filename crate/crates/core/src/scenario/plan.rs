//! Turning a scenario config into a concrete, fully seeded simulation plan.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::pool::Pool;
use crate::synthesis::{
    identical_distribution_sample, ipf_fit, match_profiles_to_users,
    proportional_regional_profiles, sample_profiles, AgentProfile, Axis, ContingencyTable,
    IpfOptions, MarginalTargets,
};
use crate::{Error, Result};

use super::{
    BackendRequirements, PopulationMethod, Questionnaire, ScenarioConfig, ScenarioKind,
};

/// Per-agent context material for the prompt.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ContextBundle {
    /// Recent posts of the matched pool user, newest first.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub posts: Vec<String>,
    /// Scenario-wide extra context (e.g. an event description).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra: Option<String>,
}

impl ContextBundle {
    pub fn is_empty(&self) -> bool {
        self.posts.is_empty() && self.extra.is_none()
    }
}

/// Everything a run needs, resolved and seeded. Two plans built from the
/// same config, pool, and seed serialize byte-identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationPlan {
    pub scenario_id: String,
    pub kind: ScenarioKind,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vote_question: Option<String>,
    pub backend: BackendRequirements,
    pub questionnaire: Questionnaire,
    pub population: Vec<AgentProfile>,
    /// Parallel to `population`.
    pub contexts: Vec<ContextBundle>,
}

impl SimulationPlan {
    /// SHA-256 of the plan's canonical JSON form, hex-encoded. Run manifests
    /// record this so results can be traced back to an exact plan.
    pub fn content_hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("plan serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_vec_pretty(self)?;
        std::fs::write(path, json).map_err(|e| Error::from(e).in_file(path))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<SimulationPlan> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::from(e).in_file(path))?;
        serde_json::from_str(&text).map_err(|e| Error::from(e).in_file(path))
    }
}

/// A uniform joint table over the schema's categories for `attributes`.
/// Used by the random-demographics ablation in place of a fitted or
/// reference-derived distribution.
fn uniform_joint(pool: &Pool, attributes: &[String]) -> Result<ContingencyTable> {
    let mut axes = Vec::with_capacity(attributes.len());
    for attr in attributes {
        let schema = pool
            .attribute(attr)
            .ok_or_else(|| Error::UnknownAttribute(attr.clone()))?;
        let cats = schema.categories();
        if cats.is_empty() {
            return Err(Error::Scenario(format!(
                "attribute '{attr}' is continuous; cannot sample categories uniformly"
            )));
        }
        axes.push(Axis::new(attr.clone(), cats.iter().cloned()));
    }
    ContingencyTable::uniform_seed(axes)
}

/// Pull up to `max_posts` post texts from a user, newest first. Posts with
/// timestamps are ordered by time; untimestamped lists are treated as
/// chronological, so the tail is newest.
fn recent_posts(user: &crate::pool::UserRecord, max_posts: usize) -> Vec<String> {
    if max_posts == 0 || user.posts.is_empty() {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..user.posts.len()).collect();
    if user.posts.iter().all(|p| p.timestamp.is_some()) {
        order.sort_by_key(|&i| (user.posts[i].timestamp, i));
    }
    order
        .into_iter()
        .rev()
        .take(max_posts)
        .map(|i| user.posts[i].text.clone())
        .collect()
}

/// Build a concrete simulation plan from a validated scenario config.
///
/// All randomness derives from `seed`; the resulting plan serializes
/// byte-identically across rebuilds. Population synthesis and user matching
/// always run — ablations change what feeds them (uniform demographics) or
/// what is kept afterwards (empty context bundles), never the mechanics, so
/// toggling `no_knowledge` leaves the population untouched.
pub fn build_plan(
    config: &ScenarioConfig,
    base_dir: impl AsRef<Path>,
    pool: &Pool,
    seed: u64,
) -> Result<SimulationPlan> {
    let base = base_dir.as_ref();
    let questionnaire = Questionnaire::load(base.join(&config.questionnaire))?;
    let spec = &config.population;

    let mut population = match spec.method {
        PopulationMethod::Ipf => {
            let targets_path = spec.targets.as_ref().ok_or_else(|| {
                Error::Scenario("ipf population needs a targets file".into())
            })?;
            let targets = MarginalTargets::load(base.join(targets_path))?;
            let joint = if config.ablation.random_demographics {
                uniform_joint(pool, &spec.attributes)?
            } else {
                let seed_table = match &spec.seed_table {
                    Some(p) => ContingencyTable::load(base.join(p))?,
                    None => targets.uniform_seed()?,
                };
                ipf_fit(&seed_table, &targets, IpfOptions::default())?.fitted
            };
            let profiles = sample_profiles(&joint, spec.size, seed)?;
            let (profiles, _report) =
                match_profiles_to_users(profiles, pool, &spec.attributes, seed)?;
            profiles
        }
        PopulationMethod::Ids => {
            if config.ablation.random_demographics {
                let joint = uniform_joint(pool, &spec.attributes)?;
                let profiles = sample_profiles(&joint, spec.size, seed)?;
                let (profiles, _report) =
                    match_profiles_to_users(profiles, pool, &spec.attributes, seed)?;
                profiles
            } else {
                let predicate = spec.reference.clone().unwrap_or_default();
                let reference = pool.query_users(&predicate)?;
                let (profiles, _report) = identical_distribution_sample(
                    pool,
                    &reference,
                    &spec.attributes,
                    spec.size,
                    seed,
                    spec.allow_replacement,
                )?;
                profiles
            }
        }
        PopulationMethod::Regional => {
            let regions_path = spec.regions.as_ref().ok_or_else(|| {
                Error::Scenario("regional population needs a regions file".into())
            })?;
            let regions = crate::synthesis::load_regions(base.join(regions_path))?;
            let income = spec.income.clone().unwrap_or_default();
            let profiles = proportional_regional_profiles(&regions, spec.size, seed, &income)?;
            let (profiles, _report) =
                match_profiles_to_users(profiles, pool, &spec.attributes, seed)?;
            profiles
        }
    };

    if let Some(key) = &config.group_key {
        for profile in &mut population {
            profile.group_key = profile.attributes.get(key).cloned();
        }
    }

    // Context bundles. no_knowledge keeps the matching above (so attribute
    // assignments are bit-identical with and without it) but ships nothing.
    let extra = if config.ablation.no_knowledge {
        None
    } else {
        match &config.context.extra_context {
            Some(rel) => {
                let path = base.join(rel);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::from(e).in_file(&path))?;
                Some(text.trim_end().to_string())
            }
            None => None,
        }
    };
    let contexts: Vec<ContextBundle> = population
        .iter()
        .map(|profile| {
            if config.ablation.no_knowledge {
                return ContextBundle::default();
            }
            let posts = if config.context.include_posts {
                profile
                    .matched_user
                    .as_ref()
                    .and_then(|key| pool.get(key))
                    .map(|user| recent_posts(user, config.context.max_posts))
                    .unwrap_or_default()
            } else {
                Vec::new()
            };
            ContextBundle { posts, extra: extra.clone() }
        })
        .collect();

    Ok(SimulationPlan {
        scenario_id: config.scenario_id.clone(),
        kind: config.kind,
        seed,
        group_key: config.group_key.clone(),
        vote_question: config.vote_question.clone(),
        backend: config.backend,
        questionnaire,
        population,
        contexts,
    })
}
