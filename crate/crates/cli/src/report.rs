use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::Context;
use mollify_lab::mollifier::MollifierKernel;
use serde::Serialize;

use crate::config::RunConfig;

/// Reproducibility header carried by every report.
#[derive(Debug, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_hash: String,
    /// Kernel normalization `C` and `c_ρ = ‖∇ρ‖_{L¹}`.
    pub kernel: MollifierKernel,
    pub config: RunConfig,
}

impl Header {
    pub fn new(config: RunConfig) -> Self {
        Self {
            tool: "mollify-lab",
            version: mollify_lab::VERSION,
            config_hash: config.hash(),
            kernel: *MollifierKernel::standard(),
            config,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Report<T: Serialize> {
    pub header: Header,
    pub passed: bool,
    pub results: T,
}

/// Writes the JSON report to `out`, or stdout.
pub fn emit<T: Serialize>(report: &Report<T>, out: Option<&Path>) -> anyhow::Result<()> {
    write_text(&serde_json::to_string_pretty(report)?, out)
}

/// Writes `text` and a newline to `out`, or stdout. A closed stdout (as
/// under `| head`) is not an error.
pub fn write_text(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, format!("{text}\n")).with_context(|| format!("writing {}", path.display())),
        None => match writeln!(io::stdout().lock(), "{text}") {
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
            r => Ok(r?),
        },
    }
}

pub fn emit_csv(csv: &str, path: Option<&Path>) -> anyhow::Result<()> {
    if let Some(path) = path {
        fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
