//! Atomic writing of result tables.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Writes `stem.csv` or `stem.json` into `dir` through a temporary file
/// renamed into place, so readers never see a partial table.
pub fn emit<C, J>(dir: &Path, stem: &str, format: Format, csv: C, json: J) -> anyhow::Result<PathBuf>
where
    C: FnOnce(&mut dyn Write) -> recomb_core::Result<()>,
    J: FnOnce() -> serde_json::Value,
{
    std::fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    let path = dir.join(format!("{stem}.{}", format.extension()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).context("creating temporary output file")?;
    match format {
        Format::Csv => csv(tmp.as_file_mut())?,
        Format::Json => {
            serde_json::to_writer_pretty(tmp.as_file_mut(), &json())?;
            tmp.as_file_mut().write_all(b"\n")?;
        }
    }
    tmp.as_file_mut().sync_all()?;
    tmp.persist(&path).with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(path)
}
