//! User records: platform, posts, and demographic labels.

use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Source platform of a user. The two platforms the pipeline was built
/// around get dedicated variants; anything else is carried verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Platform {
    X,
    Rednote,
    Custom(String),
}

impl Platform {
    pub fn parse(s: &str) -> Platform {
        match s {
            "x" => Platform::X,
            "rednote" => Platform::Rednote,
            other => Platform::Custom(other.to_string()),
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            Platform::X => "x",
            Platform::Rednote => "rednote",
            Platform::Custom(s) => s,
        }
    }
}

impl fmt::Display for Platform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Platform {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Platform {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s.trim().is_empty() {
            return Err(serde::de::Error::custom("platform must be non-empty"));
        }
        Ok(Platform::parse(&s))
    }
}

/// One social-media post with optional engagement counters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Post {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<DateTime<Utc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub likes: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comments: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reposts: Option<u64>,
}

/// One pool user: identity, post history, and labeled attributes.
///
/// `labels` maps attribute name to value; keys must be registered in the
/// pool's schema and categorical values must come from the schema's category
/// list (enforced at ingest). A `BTreeMap` keeps serialization canonical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserRecord {
    pub user_id: String,
    pub platform: Platform,
    pub posts: Vec<Post>,
    #[serde(default)]
    pub labels: BTreeMap<String, String>,
}

/// (platform, user_id) — the unique key of a user within a pool.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UserKey {
    pub platform: Platform,
    pub user_id: String,
}

impl UserRecord {
    pub fn key(&self) -> UserKey {
        UserKey { platform: self.platform.clone(), user_id: self.user_id.clone() }
    }
}

/// One annotator's opinion on one attribute of one user, to be resolved by
/// majority vote before the value enters the pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelVote {
    pub attribute: String,
    pub value: String,
    pub annotator: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn platform_round_trips_through_strings() {
        for (p, s) in [
            (Platform::X, "x"),
            (Platform::Rednote, "rednote"),
            (Platform::Custom("forum".into()), "forum"),
        ] {
            assert_eq!(p.as_str(), s);
            assert_eq!(Platform::parse(s), p);
            let json = serde_json::to_string(&p).unwrap();
            assert_eq!(json, format!("{s:?}"));
            assert_eq!(serde_json::from_str::<Platform>(&json).unwrap(), p);
        }
    }

    #[test]
    fn post_omits_absent_optional_fields() {
        let post = Post {
            text: "hello".into(),
            timestamp: None,
            likes: Some(3),
            comments: None,
            reposts: None,
        };
        let json = serde_json::to_string(&post).unwrap();
        assert_eq!(json, r#"{"text":"hello","likes":3}"#);
    }

    #[test]
    fn empty_platform_string_is_rejected() {
        assert!(serde_json::from_str::<Platform>(r#""""#).is_err());
    }
}
