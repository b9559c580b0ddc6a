//! Population synthesis: from demographic targets to concrete agents.
//!
//! Three routes produce an [`AgentProfile`] population:
//!
//! 1. **Fit + sample** — [`ipf_fit`] reconciles a seed contingency table
//!    with marginal targets, then [`sample_profiles`] draws agents from the
//!    fitted joint.
//! 2. **Direct** — [`identical_distribution_sample`] mirrors the empirical
//!    joint of a reference user set, binding each agent to a pool user.
//! 3. **Regional** — [`proportional_regional_profiles`] apportions agents
//!    across regions by census population and draws incomes from each
//!    region's log-normal + Pareto mixture.

mod income;
mod ipf;
pub mod rng;
mod sampling;
mod table;

mod regional;

pub use income::{
    income_mixture_draws, income_mixture_sample, IncomeBranch, IncomeDraw, IncomeMixtureParams,
    IncomeSampler,
};
pub use ipf::{ipf_fit, IpfOptions, IpfResult};
pub use regional::{
    load_regions, proportional_regional_profiles, regional_counts, RegionSpec,
    RegionalIncomeConfig,
};
pub use sampling::{
    identical_distribution_sample, match_profiles_to_users, sample_profiles, IdsReport,
    IdsStratum, MatchReport,
};
pub use table::{Axis, ContingencyTable, MarginalTargets};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::pool::UserKey;

/// One synthetic agent: categorical attributes, optional income, optional
/// group assignment, and (once matched) the pool user grounding it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentProfile {
    pub agent_id: String,
    pub attributes: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub income: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matched_user: Option<UserKey>,
}
