//! CSV and JSON writers.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::runner::{DesignDump, RunOutput};

pub fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<V: Serialize>(path: &Path, value: &V) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Writes `{stem}.csv`, `{stem}_timing.csv`, `{stem}_trials.json` and, when
/// present, `quantbound_bounds.csv`. Returns the paths written.
pub fn write_run(dir: &Path, stem: &str, out: &RunOutput) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let results = dir.join(format!("{stem}.csv"));
    write_csv(&results, &out.rows)?;
    written.push(results);
    let timing = dir.join(format!("{stem}_timing.csv"));
    write_csv(&timing, &out.timing)?;
    written.push(timing);
    let trials = dir.join(format!("{stem}_trials.json"));
    write_json(&trials, &out.trials)?;
    written.push(trials);
    if !out.bounds.is_empty() {
        let bounds = dir.join("quantbound_bounds.csv");
        write_csv(&bounds, &out.bounds)?;
        written.push(bounds);
    }
    Ok(written)
}

pub fn write_design(dir: &Path, dump: &DesignDump) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join("design.json");
    write_json(&path, dump)?;
    Ok(path)
}
