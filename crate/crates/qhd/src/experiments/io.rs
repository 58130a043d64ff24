//! Result emission: CSV tables and versioned JSON summaries.
//!
//! Outputs are deterministic byte for byte under a fixed seed: rows are
//! written in a sorted or construction order that does not depend on map
//! iteration, and floats print in Rust's shortest round-trip form.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::Result;

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

pub fn csv_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.csv"))
}

pub fn write_csv<I: IntoIterator<Item = String>>(
    dir: &Path,
    name: &str,
    header: &str,
    rows: I,
) -> Result<PathBuf> {
    ensure_dir(dir)?;
    let path = csv_path(dir, name);
    let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
    writeln!(f, "{header}")?;
    for row in rows {
        writeln!(f, "{row}")?;
    }
    f.flush()?;
    Ok(path)
}

pub fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    ensure_dir(dir)?;
    let path = dir.join(format!("{name}.json"));
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| crate::error::Error::Config(format!("serialize {name}: {e}")))?;
    std::fs::write(&path, text + "\n")?;
    Ok(path)
}
