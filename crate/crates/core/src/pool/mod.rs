//! User pool: ingestion, cleaning, and querying of labeled platform users.
//!
//! A [`Pool`] is an immutable snapshot of user records validated against an
//! attribute schema. Cleaning operations return new pools instead of
//! mutating, so a scenario can hold onto the exact snapshot it was built
//! from.

mod filter;
mod record;
mod schema;

pub use filter::{filter_abnormal, word_repetition_ratio, FilterReport};
pub use record::{LabelVote, Platform, Post, UserKey, UserRecord};
pub use schema::{load_schema, validate_schema, AttributeKind, AttributeSchema};

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Counters reported by a successful ingest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestStats {
    pub users: usize,
    pub posts: usize,
}

/// A normalized marginal distribution over one categorical attribute.
///
/// `probabilities` aligns with the schema's declared category order and sums
/// to 1 over the users that carry the label; users without it are only
/// counted in `missing`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginalDistribution {
    pub attribute: String,
    pub categories: Vec<String>,
    pub probabilities: Vec<f64>,
    /// Users carrying the label.
    pub counted: usize,
    /// Users missing the label.
    pub missing: usize,
}

/// Result of a majority vote over annotator labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum MajorityOutcome {
    /// A strictly most frequent value exists.
    Winner(String),
    /// The top count is shared; the caller should collect more votes.
    Abstain { tied: Vec<String> },
}

/// Immutable snapshot of a validated user pool.
#[derive(Debug, Clone)]
pub struct Pool {
    schema: Vec<AttributeSchema>,
    users: Vec<UserRecord>,
    by_key: HashMap<UserKey, usize>,
}

impl Pool {
    /// Build a pool from already-parsed records, enforcing the schema and
    /// the (platform, user_id) uniqueness invariant.
    pub fn from_records(schema: Vec<AttributeSchema>, users: Vec<UserRecord>) -> Result<Pool> {
        validate_schema(&schema)?;
        let mut by_key = HashMap::with_capacity(users.len());
        for (idx, user) in users.iter().enumerate() {
            validate_record(user, &schema).map_err(|message| Error::Ingest {
                line: idx + 1,
                message,
            })?;
            if let Some(prev) = by_key.insert(user.key(), idx) {
                return Err(Error::DuplicateUser {
                    platform: user.platform.to_string(),
                    user_id: user.user_id.clone(),
                    first: prev + 1,
                    second: idx + 1,
                });
            }
        }
        Ok(Pool { schema, users, by_key })
    }

    /// Parse a JSONL reader (one user record per line) into a pool.
    ///
    /// Malformed lines, schema violations, and duplicate users are reported
    /// with 1-based line numbers. Blank lines are ignored.
    pub fn ingest(reader: impl BufRead, schema: Vec<AttributeSchema>) -> Result<(Pool, IngestStats)> {
        validate_schema(&schema)?;
        let mut users = Vec::new();
        let mut by_line = HashMap::new();
        let mut posts = 0usize;
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: UserRecord = serde_json::from_str(&line).map_err(|e| Error::Ingest {
                line: line_no,
                message: e.to_string(),
            })?;
            validate_record(&record, &schema).map_err(|message| Error::Ingest {
                line: line_no,
                message: format!("user {:?}: {message}", record.user_id),
            })?;
            if let Some(prev) = by_line.insert(record.key(), line_no) {
                return Err(Error::DuplicateUser {
                    platform: record.platform.to_string(),
                    user_id: record.user_id,
                    first: prev,
                    second: line_no,
                });
            }
            posts += record.posts.len();
            users.push(record);
        }
        let stats = IngestStats { users: users.len(), posts };
        let pool = Pool::from_records(schema, users)?;
        Ok((pool, stats))
    }

    /// Load a pool from a JSONL file plus its schema file.
    pub fn load(pool_path: impl AsRef<Path>, schema_path: impl AsRef<Path>) -> Result<(Pool, IngestStats)> {
        let schema = load_schema(schema_path)?;
        let path = pool_path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::from(e).in_file(path))?;
        Pool::ingest(std::io::BufReader::new(file), schema).map_err(|e| match e {
            e @ Error::File { .. } => e,
            other => other.in_file(path),
        })
    }

    /// Write the pool as canonical JSONL: one record per line, stable field
    /// order, labels sorted by attribute name. Ingesting the output yields
    /// the same pool and re-exporting reproduces the bytes.
    pub fn write_jsonl(&self, mut writer: impl Write) -> Result<()> {
        for user in &self.users {
            serde_json::to_writer(&mut writer, user)?;
            writer.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn schema(&self) -> &[AttributeSchema] {
        &self.schema
    }

    pub fn attribute(&self, name: &str) -> Option<&AttributeSchema> {
        self.schema.iter().find(|a| a.name == name)
    }

    /// Users in ingestion order.
    pub fn users(&self) -> &[UserRecord] {
        &self.users
    }

    pub fn get(&self, key: &UserKey) -> Option<&UserRecord> {
        self.by_key.get(key).map(|&i| &self.users[i])
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    /// Users whose labels match every (attribute, value) pair in the
    /// predicate. An empty predicate matches everyone. Order follows
    /// ingestion order, so results are deterministic.
    pub fn query_users(&self, predicate: &BTreeMap<String, String>) -> Result<Vec<&UserRecord>> {
        for attr in predicate.keys() {
            if self.attribute(attr).is_none() {
                return Err(Error::UnknownAttribute(attr.clone()));
            }
        }
        Ok(self
            .users
            .iter()
            .filter(|u| {
                predicate
                    .iter()
                    .all(|(k, v)| u.labels.get(k).is_some_and(|lv| lv == v))
            })
            .collect())
    }

    /// Normalized distribution of a categorical attribute over the users
    /// that carry it. Errors if the attribute is unregistered, continuous,
    /// or carried by no one (an all-missing marginal cannot be normalized).
    pub fn marginal_distribution(&self, attribute: &str) -> Result<MarginalDistribution> {
        let attr = self
            .attribute(attribute)
            .ok_or_else(|| Error::UnknownAttribute(attribute.to_string()))?;
        let categories = match &attr.kind {
            AttributeKind::Categorical { values } => values.clone(),
            AttributeKind::Continuous { .. } => {
                return Err(Error::Schema(format!(
                    "attribute {attribute:?} is continuous; marginals need categories"
                )))
            }
        };
        let mut counts = vec![0usize; categories.len()];
        let mut missing = 0usize;
        for user in &self.users {
            match user.labels.get(attribute) {
                Some(value) => {
                    // Position is guaranteed by ingest-time validation.
                    let idx = categories.iter().position(|c| c == value).ok_or_else(|| {
                        Error::Schema(format!(
                            "user {:?} carries unregistered value {value:?} for {attribute:?}",
                            user.user_id
                        ))
                    })?;
                    counts[idx] += 1;
                }
                None => missing += 1,
            }
        }
        let counted: usize = counts.iter().sum();
        if counted == 0 {
            return Err(Error::NoLabeledUsers(attribute.to_string()));
        }
        let probabilities = counts.iter().map(|&c| c as f64 / counted as f64).collect();
        Ok(MarginalDistribution {
            attribute: attribute.to_string(),
            categories,
            probabilities,
            counted,
            missing,
        })
    }
}

fn validate_record(user: &UserRecord, schema: &[AttributeSchema]) -> std::result::Result<(), String> {
    if user.user_id.trim().is_empty() {
        return Err("user_id must be non-empty".into());
    }
    for (i, post) in user.posts.iter().enumerate() {
        if post.text.trim().is_empty() {
            return Err(format!("post {} has empty text", i + 1));
        }
    }
    for (key, value) in &user.labels {
        let attr = schema
            .iter()
            .find(|a| &a.name == key)
            .ok_or_else(|| format!("label {key:?} is not a registered attribute"))?;
        match &attr.kind {
            AttributeKind::Categorical { values } => {
                if !values.contains(value) {
                    return Err(format!(
                        "label {key:?} has value {value:?}, expected one of {values:?}"
                    ));
                }
            }
            AttributeKind::Continuous { .. } => {
                let parsed: std::result::Result<f64, _> = value.parse();
                match parsed {
                    Ok(v) if v.is_finite() => {}
                    _ => {
                        return Err(format!(
                            "label {key:?} has value {value:?}, expected a finite number"
                        ))
                    }
                }
            }
        }
    }
    Ok(())
}

/// Resolve annotator votes for one attribute of one user.
///
/// Returns the strictly most frequent value, or an abstention listing the
/// tied values (sorted) when the top count is shared. All votes must target
/// `attribute`; mixing attributes in one ballot is a caller bug.
pub fn majority_vote(votes: &[LabelVote], attribute: &str) -> Result<MajorityOutcome> {
    if votes.is_empty() {
        return Err(Error::NoVotes(attribute.to_string()));
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for vote in votes {
        if vote.attribute != attribute {
            return Err(Error::VoteAttributeMismatch {
                expected: attribute.to_string(),
                got: vote.attribute.clone(),
            });
        }
        *counts.entry(vote.value.as_str()).or_insert(0) += 1;
    }
    let top = counts.values().copied().max().unwrap_or(0);
    let tied: Vec<String> = counts
        .iter()
        .filter(|(_, &c)| c == top)
        .map(|(v, _)| v.to_string())
        .collect();
    if tied.len() == 1 {
        Ok(MajorityOutcome::Winner(tied.into_iter().next().unwrap()))
    } else {
        Ok(MajorityOutcome::Abstain { tied })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> Vec<AttributeSchema> {
        vec![
            AttributeSchema {
                name: "gender".into(),
                kind: AttributeKind::Categorical {
                    values: vec!["female".into(), "male".into()],
                },
                description: String::new(),
            },
            AttributeSchema {
                name: "income".into(),
                kind: AttributeKind::Continuous { unit: "CNY".into() },
                description: String::new(),
            },
        ]
    }

    fn line(user: &str, gender: Option<&str>) -> String {
        let labels = match gender {
            Some(g) => format!(r#","labels":{{"gender":"{g}"}}"#),
            None => String::new(),
        };
        format!(
            r#"{{"user_id":"{user}","platform":"x","posts":[{{"text":"hello from {user}"}}]{labels}}}"#
        )
    }

    #[test]
    fn ingest_counts_users_and_posts() {
        let input = [line("u1", Some("female")), line("u2", Some("male")), line("u3", None)]
            .join("\n");
        let (pool, stats) = Pool::ingest(input.as_bytes(), schema()).unwrap();
        assert_eq!(stats.users, 3);
        assert_eq!(stats.posts, 3);
        assert_eq!(pool.len(), 3);
    }

    #[test]
    fn ingest_reports_offending_line_numbers() {
        let input = format!("{}\nnot json\n", line("u1", None));
        let err = Pool::ingest(input.as_bytes(), schema()).unwrap_err();
        match err {
            Error::Ingest { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn ingest_rejects_unregistered_label_values() {
        let input = line("u1", Some("other"));
        let err = Pool::ingest(input.as_bytes(), schema()).unwrap_err();
        assert!(err.to_string().contains("gender"), "{err}");
    }

    #[test]
    fn ingest_rejects_duplicate_users_naming_both_lines() {
        let input = [line("u1", None), line("u2", None), line("u1", None)].join("\n");
        let err = Pool::ingest(input.as_bytes(), schema()).unwrap_err();
        match err {
            Error::DuplicateUser { first, second, .. } => {
                assert_eq!((first, second), (1, 3));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn same_user_id_on_different_platforms_is_allowed() {
        let a = line("u1", None);
        let b = a.replace(r#""platform":"x""#, r#""platform":"rednote""#);
        let (pool, _) = Pool::ingest(format!("{a}\n{b}").as_bytes(), schema()).unwrap();
        assert_eq!(pool.len(), 2);
    }

    #[test]
    fn continuous_labels_must_parse_as_numbers() {
        let input = r#"{"user_id":"u1","platform":"x","posts":[{"text":"hi"}],"labels":{"income":"lots"}}"#;
        assert!(Pool::ingest(input.as_bytes(), schema()).is_err());
        let input = r#"{"user_id":"u1","platform":"x","posts":[{"text":"hi"}],"labels":{"income":"12345.5"}}"#;
        assert!(Pool::ingest(input.as_bytes(), schema()).is_ok());
    }

    #[test]
    fn export_then_ingest_round_trips_bit_identically() {
        let input = [line("u1", Some("female")), line("u2", None)].join("\n");
        let (pool, _) = Pool::ingest(input.as_bytes(), schema()).unwrap();
        let mut first = Vec::new();
        pool.write_jsonl(&mut first).unwrap();
        let (again, _) = Pool::ingest(first.as_slice(), schema()).unwrap();
        let mut second = Vec::new();
        again.write_jsonl(&mut second).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn marginal_distribution_normalizes_and_counts_missing() {
        let input = [
            line("u1", Some("female")),
            line("u2", Some("female")),
            line("u3", Some("male")),
            line("u4", None),
        ]
        .join("\n");
        let (pool, _) = Pool::ingest(input.as_bytes(), schema()).unwrap();
        let m = pool.marginal_distribution("gender").unwrap();
        assert_eq!(m.categories, vec!["female".to_string(), "male".to_string()]);
        assert!((m.probabilities[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.probabilities[1] - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!((m.counted, m.missing), (3, 1));
        let sum: f64 = m.probabilities.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn marginal_distribution_rejects_bad_attributes() {
        let (pool, _) = Pool::ingest(line("u1", Some("female")).as_bytes(), schema()).unwrap();
        assert!(matches!(
            pool.marginal_distribution("height"),
            Err(Error::UnknownAttribute(_))
        ));
        assert!(pool.marginal_distribution("income").is_err());
    }

    #[test]
    fn query_users_applies_conjunctive_equality() {
        let input = [line("u1", Some("female")), line("u2", Some("male")), line("u3", None)]
            .join("\n");
        let (pool, _) = Pool::ingest(input.as_bytes(), schema()).unwrap();
        let mut predicate = BTreeMap::new();
        predicate.insert("gender".to_string(), "female".to_string());
        let hits = pool.query_users(&predicate).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].user_id, "u1");
        // Empty predicate matches everyone, in ingestion order.
        let all = pool.query_users(&BTreeMap::new()).unwrap();
        assert_eq!(all.len(), 3);
        assert_eq!(all[0].user_id, "u1");
        // Unregistered attribute in the predicate is an error, not a miss.
        let mut bad = BTreeMap::new();
        bad.insert("height".to_string(), "tall".to_string());
        assert!(pool.query_users(&bad).is_err());
    }
}
