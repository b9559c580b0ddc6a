//! Abnormal-user filtering based on the word repetition ratio.
//!
//! Spam accounts tend to post near-identical text over and over. The ratio
//! measures, averaged over all unordered post pairs, how much of the longer
//! post's token multiset reappears in the other post. Accounts whose ratio
//! exceeds a threshold (and that have enough posts for the statistic to mean
//! anything) are dropped.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::pool::{Pool, UserKey};
use crate::{Error, Result};

/// Lowercase a post and split it into alphanumeric tokens.
fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn token_counts(tokens: &[String]) -> HashMap<&str, usize> {
    let mut counts = HashMap::new();
    for t in tokens {
        *counts.entry(t.as_str()).or_insert(0) += 1;
    }
    counts
}

/// Overlap of one post pair: multiset intersection size over the larger
/// token count. Two empty posts overlap fully by convention.
fn pair_overlap(a: &[String], b: &[String]) -> f64 {
    let denom = a.len().max(b.len());
    if denom == 0 {
        return 1.0;
    }
    let (ca, cb) = (token_counts(a), token_counts(b));
    let inter: usize = ca
        .iter()
        .map(|(tok, &na)| na.min(cb.get(tok).copied().unwrap_or(0)))
        .sum();
    inter as f64 / denom as f64
}

/// Mean pairwise token overlap across a user's posts, in `[0, 1]`.
///
/// A single post has no pairs and scores `0.0`; an empty post list is an
/// error (the statistic is undefined, and silently scoring such users would
/// hide ingest bugs).
pub fn word_repetition_ratio(posts: &[String]) -> Result<f64> {
    if posts.is_empty() {
        return Err(Error::EmptyInput(
            "word repetition ratio needs at least one post".into(),
        ));
    }
    if posts.len() == 1 {
        return Ok(0.0);
    }
    let tokens: Vec<Vec<String>> = posts.iter().map(|p| tokenize(p)).collect();
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..tokens.len() {
        for j in (i + 1)..tokens.len() {
            total += pair_overlap(&tokens[i], &tokens[j]);
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

/// Outcome of one [`filter_abnormal`] pass.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FilterReport {
    pub threshold: f64,
    pub min_posts: usize,
    pub total_users: usize,
    pub retained_users: usize,
    /// Fraction of users kept, in `[0, 1]`.
    pub retention_rate: f64,
    /// Keys of the removed users, in pool order.
    pub removed: Vec<UserKey>,
}

/// Drop users whose repetition ratio strictly exceeds `threshold`.
///
/// Users with fewer than `min_posts` posts are always retained: with too few
/// posts the ratio is noise, and the cleaning step is meant to catch
/// persistent spam patterns, not terse accounts. Returns the retained pool
/// (ingestion order preserved) plus a report of what was removed.
pub fn filter_abnormal(pool: &Pool, threshold: f64, min_posts: usize) -> Result<(Pool, FilterReport)> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::Schema(format!(
            "repetition threshold must be in [0, 1], got {threshold}"
        )));
    }
    let mut retained = Vec::new();
    let mut removed = Vec::new();
    for user in pool.users() {
        let suspicious = if user.posts.len() >= min_posts.max(2) {
            let texts: Vec<String> = user.posts.iter().map(|p| p.text.clone()).collect();
            word_repetition_ratio(&texts)? > threshold
        } else {
            false
        };
        if suspicious {
            removed.push(user.key());
        } else {
            retained.push(user.clone());
        }
    }
    let total = pool.len();
    let report = FilterReport {
        threshold,
        min_posts,
        total_users: total,
        retained_users: retained.len(),
        retention_rate: if total == 0 { 1.0 } else { retained.len() as f64 / total as f64 },
        removed,
    };
    let cleaned = Pool::from_records(pool.schema().to_vec(), retained)?;
    Ok((cleaned, report))
}
