//! `fixtures` subcommand: regenerate the bundled demo fixture tree.

use std::path::PathBuf;

use anyhow::Result;
use clap::Args;

use crate::output;

#[derive(Debug, Args)]
pub struct FixturesArgs {
    /// Target directory for the generated tree.
    #[arg(short, long, default_value = "fixtures")]
    output: PathBuf,
}

pub fn run(args: &FixturesArgs, json: bool) -> Result<()> {
    let files = socioverse_core::fixtures::write_all(&args.output)?;
    if json {
        output::print_json(&serde_json::json!({
            "dir": args.output,
            "files": files,
        }))?;
    } else {
        println!(
            "wrote {} fixture files under {}",
            files.len(),
            args.output.display()
        );
    }
    Ok(())
}
