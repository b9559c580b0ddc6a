//! Project-level configuration and setting resolution.
//!
//! A project config file supplies workspace-wide defaults (standard paths, a
//! default backend, a default seed). Every setting follows the same
//! precedence: command-line flag, then environment variable, then project
//! config file, then built-in default. The config file itself is located the
//! same way: `--project <file>` beats the `SOCIOVERSE_CONFIG` environment
//! variable, which beats `./socioverse.json`, which beats running with no
//! project config at all.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

/// Environment variable naming the project config file.
pub const CONFIG_ENV: &str = "SOCIOVERSE_CONFIG";

/// Config file picked up from the working directory when nothing else is set.
pub const DEFAULT_CONFIG_NAME: &str = "socioverse.json";

/// Seed used when neither the command line nor the project config names one.
pub const DEFAULT_SEED: u64 = 42;

/// Which agent backend executes a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    /// Deterministic built-in oracle; needs no network or credentials.
    Oracle,
    /// Chat-completions HTTP service (credentials via `SOCIOVERSE_API_KEY`).
    Http,
}

/// Standard project paths. All optional; relative paths are resolved against
/// the directory containing the config file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectPaths {
    pub pool: Option<PathBuf>,
    pub schema: Option<PathBuf>,
    pub scenarios: Option<PathBuf>,
    /// Root directory for pipeline run directories.
    pub runs: Option<PathBuf>,
}

/// Default backend settings. The API key is deliberately absent: credentials
/// are only ever read from the environment, never from files.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendDefaults {
    pub kind: Option<BackendKind>,
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub timeout_secs: Option<u64>,
    pub rpm_limit: Option<u32>,
    pub concurrency: Option<usize>,
    pub max_attempts: Option<u32>,
}

/// Parsed project config file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectConfig {
    pub paths: ProjectPaths,
    pub backend: BackendDefaults,
    /// Default seed for planning and pipelines.
    pub seed: Option<u64>,
    /// `"quiet"` suppresses progress lines on stderr; anything else keeps them.
    pub log_level: Option<String>,
}

impl ProjectConfig {
    /// True when progress chatter should be suppressed.
    pub fn quiet(&self) -> bool {
        matches!(self.log_level.as_deref(), Some("quiet"))
    }
}

/// Locate, load, and path-resolve the project config.
///
/// An explicitly named file (flag or environment variable) must exist and
/// parse; a silently-missing override would be worse than an error. The
/// fallback `./socioverse.json` is optional. Relative paths inside the file
/// are rewritten against the file's own directory so the config means the
/// same thing from any working directory.
pub fn load_project(flag: Option<&Path>) -> Result<ProjectConfig> {
    let named = match flag {
        Some(path) => Some(path.to_path_buf()),
        None => std::env::var_os(CONFIG_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from),
    };
    let path = match named {
        Some(path) => path,
        None => {
            let fallback = PathBuf::from(DEFAULT_CONFIG_NAME);
            if !fallback.is_file() {
                return Ok(ProjectConfig::default());
            }
            fallback
        }
    };
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("cannot read project config {}", path.display()))?;
    let mut config: ProjectConfig = serde_json::from_str(&text)
        .with_context(|| format!("cannot parse project config {}", path.display()))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    for entry in [
        &mut config.paths.pool,
        &mut config.paths.schema,
        &mut config.paths.scenarios,
        &mut config.paths.runs,
    ] {
        if let Some(p) = entry {
            if p.is_relative() {
                *entry = Some(base.join(&p));
            }
        }
    }
    Ok(config)
}

/// Resolve the effective seed: flag, then project config, then the default.
pub fn resolve_seed(flag: Option<u64>, project: &ProjectConfig) -> u64 {
    flag.or(project.seed).unwrap_or(DEFAULT_SEED)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_empty() {
        let config = ProjectConfig::default();
        assert!(config.paths.runs.is_none());
        assert!(config.backend.kind.is_none());
        assert_eq!(resolve_seed(None, &config), DEFAULT_SEED);
        assert_eq!(resolve_seed(Some(7), &config), 7);
    }

    #[test]
    fn relative_paths_resolve_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("socioverse.json");
        std::fs::write(
            &path,
            r#"{"paths": {"runs": "runs", "pool": "/abs/pool.jsonl"}, "seed": 9}"#,
        )
        .unwrap();
        let config = load_project(Some(&path)).unwrap();
        assert_eq!(config.paths.runs.as_deref(), Some(dir.path().join("runs").as_path()));
        assert_eq!(config.paths.pool.as_deref(), Some(Path::new("/abs/pool.jsonl")));
        assert_eq!(resolve_seed(None, &config), 9);
    }

    #[test]
    fn named_config_must_exist() {
        let missing = Path::new("/nonexistent/socioverse.json");
        assert!(load_project(Some(missing)).is_err());
    }
}
