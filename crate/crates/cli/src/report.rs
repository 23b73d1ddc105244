//! Report emission: JSON envelope or CSV table, to stdout or a file.

use std::io::Write;
use std::path::Path;

use clap::ValueEnum;

use crate::runner::Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

pub fn emit(outcome: &Outcome, format: OutputFormat, out: Option<&Path>) -> anyhow::Result<()> {
    let body = match format {
        OutputFormat::Json => {
            let mut text = serde_json::to_string_pretty(outcome)?;
            text.push('\n');
            text
        }
        OutputFormat::Csv => outcome.csv.clone(),
    };
    match out {
        Some(path) => {
            std::fs::File::create(path)?.write_all(body.as_bytes())?;
        }
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
        }
    }
    Ok(())
}
