//! Attribute schema: the registry of demographic dimensions a pool may carry.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Whether an attribute takes one of a closed set of values or a number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttributeKind {
    /// Closed category list; label values must be drawn from `values`.
    Categorical { values: Vec<String> },
    /// Free numeric attribute; `unit` documents the measurement.
    Continuous { unit: String },
}

/// One demographic dimension (for example `gender` or `income`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSchema {
    pub name: String,
    #[serde(flatten)]
    pub kind: AttributeKind,
    pub description: String,
}

impl AttributeSchema {
    /// Category list for categorical attributes, empty for continuous ones.
    pub fn categories(&self) -> &[String] {
        match &self.kind {
            AttributeKind::Categorical { values } => values,
            AttributeKind::Continuous { .. } => &[],
        }
    }
}

/// Validate a schema list: unique names, non-empty duplicate-free categories.
pub fn validate_schema(schema: &[AttributeSchema]) -> Result<()> {
    let mut names = BTreeSet::new();
    for attr in schema {
        if attr.name.trim().is_empty() {
            return Err(Error::Schema("attribute with empty name".into()));
        }
        if !names.insert(attr.name.clone()) {
            return Err(Error::Schema(format!("duplicate attribute {:?}", attr.name)));
        }
        if let AttributeKind::Categorical { values } = &attr.kind {
            if values.is_empty() {
                return Err(Error::Schema(format!(
                    "categorical attribute {:?} has no values",
                    attr.name
                )));
            }
            let mut seen = BTreeSet::new();
            for v in values {
                if v.trim().is_empty() {
                    return Err(Error::Schema(format!(
                        "attribute {:?} has an empty category value",
                        attr.name
                    )));
                }
                if !seen.insert(v.clone()) {
                    return Err(Error::Schema(format!(
                        "attribute {:?} lists category {:?} twice",
                        attr.name, v
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Load and validate a schema file (a JSON array of attribute definitions).
pub fn load_schema(path: impl AsRef<Path>) -> Result<Vec<AttributeSchema>> {
    let path = path.as_ref();
    let go = || -> Result<Vec<AttributeSchema>> {
        let text = std::fs::read_to_string(path)?;
        let schema: Vec<AttributeSchema> = serde_json::from_str(&text)?;
        validate_schema(&schema)?;
        Ok(schema)
    };
    go().map_err(|e| e.in_file(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat(name: &str, values: &[&str]) -> AttributeSchema {
        AttributeSchema {
            name: name.into(),
            kind: AttributeKind::Categorical {
                values: values.iter().map(|v| v.to_string()).collect(),
            },
            description: String::new(),
        }
    }

    #[test]
    fn accepts_well_formed_schema() {
        let schema = vec![
            cat("gender", &["female", "male"]),
            AttributeSchema {
                name: "income".into(),
                kind: AttributeKind::Continuous { unit: "CNY".into() },
                description: "monthly income".into(),
            },
        ];
        assert!(validate_schema(&schema).is_ok());
    }

    #[test]
    fn rejects_duplicate_attribute_names() {
        let schema = vec![cat("gender", &["female", "male"]), cat("gender", &["x"])];
        assert!(validate_schema(&schema).is_err());
    }

    #[test]
    fn rejects_duplicate_categories_and_empty_lists() {
        assert!(validate_schema(&[cat("g", &["a", "a"])]).is_err());
        assert!(validate_schema(&[cat("g", &[])]).is_err());
    }

    #[test]
    fn serde_round_trip_preserves_kind() {
        let schema = cat("gender", &["female", "male"]);
        let json = serde_json::to_string(&schema).unwrap();
        let back: AttributeSchema = serde_json::from_str(&json).unwrap();
        assert_eq!(schema, back);
        assert!(json.contains("\"kind\":\"categorical\""));
    }
}
