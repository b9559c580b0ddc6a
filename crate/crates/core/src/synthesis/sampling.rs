//! Drawing agent populations from joint distributions, and attaching
//! concrete pool users to the drawn profiles.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::rng::substream;
use super::table::ContingencyTable;
use super::AgentProfile;
use crate::pool::{Pool, UserRecord};
use crate::{Error, Result};

/// Zero-padded sequential agent id ("agent-000042").
pub(crate) fn agent_id(index: usize) -> String {
    format!("agent-{index:06}")
}

/// Largest-remainder apportionment of `n` seats over non-negative weights.
///
/// Floors the exact quotas, then hands remaining seats to the largest
/// remainders; remainder ties break toward the smaller `tie_keys` entry.
pub(crate) fn apportion<K: Ord>(weights: &[f64], n: usize, tie_keys: &[K]) -> Vec<usize> {
    debug_assert_eq!(weights.len(), tie_keys.len());
    let total: f64 = weights.iter().sum();
    let mut counts = vec![0usize; weights.len()];
    if total <= 0.0 {
        return counts;
    }
    let mut remainders: Vec<(usize, f64)> = Vec::with_capacity(weights.len());
    let mut assigned = 0usize;
    for (i, &w) in weights.iter().enumerate() {
        let quota = n as f64 * w / total;
        let floor = quota.floor() as usize;
        counts[i] = floor;
        assigned += floor;
        remainders.push((i, quota - floor as f64));
    }
    remainders.sort_by(|(i, ra), (j, rb)| {
        rb.partial_cmp(ra)
            .unwrap()
            .then_with(|| tie_keys[*i].cmp(&tie_keys[*j]))
    });
    for (i, _) in remainders.into_iter().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Draw `n` independent agent profiles from a joint distribution.
///
/// Each draw uses its own RNG substream addressed by `(seed, agent index)`,
/// so draw `i` is the same no matter how many agents surround it. Profiles
/// carry one attribute per table axis; ids are sequential.
pub fn sample_profiles(table: &ContingencyTable, n: usize, seed: u64) -> Result<Vec<AgentProfile>> {
    let total = table.total();
    if total <= 0.0 {
        return Err(Error::Sampling("cannot sample from a zero-mass table".into()));
    }
    // Cumulative distribution over cells for inverse-CDF draws.
    let mut cdf = Vec::with_capacity(table.cells().len());
    let mut acc = 0.0;
    for &c in table.cells() {
        acc += c / total;
        cdf.push(acc);
    }
    let names: Vec<&str> = table.axes().iter().map(|a| a.name.as_str()).collect();
    let mut profiles = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = substream(seed, i as u64);
        let u: f64 = rng.random();
        let cell = cdf.partition_point(|&p| p <= u).min(cdf.len() - 1);
        let attributes: BTreeMap<String, String> = names
            .iter()
            .zip(table.categories_of(cell))
            .map(|(n, c)| (n.to_string(), c.to_string()))
            .collect();
        profiles.push(AgentProfile {
            agent_id: agent_id(i),
            attributes,
            income: None,
            group_key: None,
            matched_user: None,
        });
    }
    Ok(profiles)
}

/// Per-stratum bookkeeping from [`identical_distribution_sample`].
#[derive(Debug, Clone, Serialize)]
pub struct IdsStratum {
    /// "attr=value,attr=value" in attribute order.
    pub stratum: String,
    /// Reference users falling in the stratum.
    pub reference_count: usize,
    /// Agents allocated to the stratum.
    pub allocated: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdsReport {
    pub strata: Vec<IdsStratum>,
    /// Draws that had to reuse a pool user after the stratum ran dry.
    pub with_replacement_draws: usize,
}

fn stratum_key(attributes: &[String], values: &[&str]) -> String {
    attributes
        .iter()
        .zip(values)
        .map(|(a, v)| format!("{a}={v}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Sample a population whose joint attribute distribution mirrors a
/// reference user set, and bind every profile to a concrete pool user.
///
/// The reference's empirical joint over `attributes` is apportioned into
/// exact stratum counts (largest remainder), so a reference equal to the
/// pool at `n = |pool|` reproduces every stratum at exactly its pool count.
/// Within a stratum, users are drawn uniformly without replacement;
/// exhausting a stratum is an error unless `allow_replacement` is set, in
/// which case further draws reuse stratum members and are counted in the
/// report.
pub fn identical_distribution_sample(
    pool: &Pool,
    reference: &[&UserRecord],
    attributes: &[String],
    n: usize,
    seed: u64,
    allow_replacement: bool,
) -> Result<(Vec<AgentProfile>, IdsReport)> {
    if reference.is_empty() {
        return Err(Error::Sampling("reference user set is empty".into()));
    }
    if attributes.is_empty() {
        return Err(Error::Sampling("attribute list is empty".into()));
    }
    // Axes follow the schema's category lists so stratum enumeration is
    // stable even for categories absent from the reference.
    let mut axes = Vec::new();
    for attr in attributes {
        let schema = pool
            .attribute(attr)
            .ok_or_else(|| Error::UnknownAttribute(attr.clone()))?;
        let cats = schema.categories();
        if cats.is_empty() {
            return Err(Error::Sampling(format!(
                "attribute {attr:?} is continuous; direct sampling needs categories"
            )));
        }
        axes.push(super::table::Axis::new(attr.clone(), cats.iter().cloned()));
    }
    let shape_table = ContingencyTable::uniform_seed(axes)?;

    // Empirical joint of the reference.
    let mut ref_counts = vec![0usize; shape_table.cells().len()];
    for user in reference {
        let coords = user_coords(user, attributes, &shape_table).map_err(|missing| {
            Error::Sampling(format!(
                "reference user {:?} has no usable label for {missing:?}",
                user.user_id
            ))
        })?;
        ref_counts[shape_table.index_of(&coords)] += 1;
    }

    // Exact proportional allocation of n over strata.
    let weights: Vec<f64> = ref_counts.iter().map(|&c| c as f64).collect();
    let tie_keys: Vec<usize> = (0..weights.len()).collect();
    let allocation = apportion(&weights, n, &tie_keys);

    // Pool users per stratum, in ingestion order.
    let mut pool_members: Vec<Vec<usize>> = vec![Vec::new(); shape_table.cells().len()];
    for (idx, user) in pool.users().iter().enumerate() {
        if let Ok(coords) = user_coords(user, attributes, &shape_table) {
            pool_members[shape_table.index_of(&coords)].push(idx);
        }
    }

    let mut profiles = Vec::with_capacity(n);
    let mut strata = Vec::new();
    let mut with_replacement_draws = 0usize;
    for (cell, &count) in allocation.iter().enumerate() {
        let cats = shape_table.categories_of(cell);
        if count == 0 {
            continue;
        }
        let key = stratum_key(attributes, &cats);
        let members = &pool_members[cell];
        if members.len() < count && !allow_replacement {
            return Err(Error::StratumExhausted {
                stratum: key,
                available: members.len(),
                requested: count,
            });
        }
        if members.is_empty() {
            return Err(Error::Sampling(format!(
                "stratum {key} has no pool users at all; replacement cannot help"
            )));
        }
        let mut rng = substream(seed, cell as u64);
        let mut order: Vec<usize> = members.clone();
        order.shuffle(&mut rng);
        for k in 0..count {
            let user_idx = if k < order.len() {
                order[k]
            } else {
                with_replacement_draws += 1;
                order[rng.random_range(0..order.len())]
            };
            let user = &pool.users()[user_idx];
            let attributes_map: BTreeMap<String, String> = attributes
                .iter()
                .zip(&cats)
                .map(|(a, c)| (a.clone(), c.to_string()))
                .collect();
            profiles.push(AgentProfile {
                agent_id: agent_id(profiles.len()),
                attributes: attributes_map,
                income: None,
                group_key: None,
                matched_user: Some(user.key()),
            });
        }
        strata.push(IdsStratum {
            stratum: key,
            reference_count: ref_counts[cell],
            allocated: count,
        });
    }
    Ok((profiles, IdsReport { strata, with_replacement_draws }))
}

/// Coordinates of a user's labels in table axis order, or the first
/// attribute it is missing.
fn user_coords<'a>(
    user: &UserRecord,
    attributes: &'a [String],
    table: &ContingencyTable,
) -> std::result::Result<Vec<usize>, &'a str> {
    let mut coords = Vec::with_capacity(attributes.len());
    for (attr, axis) in attributes.iter().zip(table.axes()) {
        let value = user.labels.get(attr).ok_or(attr.as_str())?;
        let idx = axis
            .categories
            .iter()
            .position(|c| c == value)
            .ok_or(attr.as_str())?;
        coords.push(idx);
    }
    Ok(coords)
}

/// Outcome of [`match_profiles_to_users`].
#[derive(Debug, Clone, Serialize)]
pub struct MatchReport {
    pub matched_without_replacement: usize,
    pub matched_with_replacement: usize,
    pub unmatched: usize,
    /// Agents whose stratum ran dry and reused a pool user.
    pub with_replacement_agents: Vec<String>,
    /// Agents whose stratum has no pool users at all.
    pub unmatched_agents: Vec<String>,
}

/// Bind each profile to a pool user agreeing with it on `attributes`.
///
/// Matching is without replacement while a stratum lasts, then with
/// replacement (flagged per agent in the report). Profiles whose stratum is
/// entirely absent from the pool stay unmatched — reported, not fatal, so
/// callers can decide whether a partially grounded population is usable.
pub fn match_profiles_to_users(
    mut profiles: Vec<AgentProfile>,
    pool: &Pool,
    attributes: &[String],
    seed: u64,
) -> Result<(Vec<AgentProfile>, MatchReport)> {
    for attr in attributes {
        if pool.attribute(attr).is_none() {
            return Err(Error::UnknownAttribute(attr.clone()));
        }
    }
    // Group pool users by their attribute values.
    let mut strata: BTreeMap<Vec<&str>, Vec<usize>> = BTreeMap::new();
    'users: for (idx, user) in pool.users().iter().enumerate() {
        let mut key = Vec::with_capacity(attributes.len());
        for attr in attributes {
            match user.labels.get(attr) {
                Some(v) => key.push(v.as_str()),
                None => continue 'users,
            }
        }
        strata.entry(key).or_default().push(idx);
    }
    // Shuffle each stratum once with its own substream (indexed by the
    // stratum's position in sorted order, so the assignment is independent
    // of profile processing order).
    let mut queues: BTreeMap<Vec<&str>, Vec<usize>> = BTreeMap::new();
    for (pos, (key, members)) in strata.into_iter().enumerate() {
        let mut rng = substream(seed, pos as u64);
        let mut order = members;
        order.shuffle(&mut rng);
        queues.insert(key, order);
    }

    let mut report = MatchReport {
        matched_without_replacement: 0,
        matched_with_replacement: 0,
        unmatched: 0,
        with_replacement_agents: Vec::new(),
        unmatched_agents: Vec::new(),
    };
    let mut taken: BTreeMap<Vec<&str>, usize> = BTreeMap::new();
    for (i, profile) in profiles.iter_mut().enumerate() {
        let key: Vec<&str> = attributes
            .iter()
            .map(|a| profile.attributes.get(a).map(String::as_str).unwrap_or(""))
            .collect();
        match queues.get(&key) {
            None => {
                report.unmatched += 1;
                report.unmatched_agents.push(profile.agent_id.clone());
            }
            Some(queue) => {
                let used = taken.entry(key.clone()).or_insert(0);
                let user_idx = if *used < queue.len() {
                    let idx = queue[*used];
                    *used += 1;
                    report.matched_without_replacement += 1;
                    idx
                } else {
                    // Replacement draws get per-agent streams offset far away
                    // from the per-stratum shuffle streams.
                    let mut rng = substream(seed, (1u64 << 32) + i as u64);
                    report.matched_with_replacement += 1;
                    report.with_replacement_agents.push(profile.agent_id.clone());
                    queue[rng.random_range(0..queue.len())]
                };
                profile.matched_user = Some(pool.users()[user_idx].key());
            }
        }
    }
    Ok((profiles, report))
}
