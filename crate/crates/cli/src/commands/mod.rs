//! Subcommand implementations, one module per command group.

pub mod evaluate;
pub mod fixtures;
pub mod pipeline;
pub mod pool;
pub mod run;
pub mod scenario;
pub mod synth;

use std::path::Path;

/// Directory containing `path`, against which sibling files are resolved.
/// An empty parent (plain file name) means the current directory.
pub fn base_dir(path: &Path) -> &Path {
    match path.parent() {
        Some(parent) if !parent.as_os_str().is_empty() => parent,
        _ => Path::new("."),
    }
}
