//! File writers. Numbers use the shortest round-trip decimal form, so equal
//! results give equal bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;
use crate::records::ConfigEcho;

/// `# <config echo as JSON>`, one header line, then one line per row.
pub fn write_csv<T: Serialize>(path: &Path, echo: &ConfigEcho, rows: &[T]) -> Result<PathBuf, CliError> {
    let mut file = BufWriter::new(File::create(path)?);
    writeln!(file, "# {}", serde_json::to_string(echo)?)?;
    let mut w = csv::Writer::from_writer(file);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(path.to_path_buf())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<PathBuf, CliError> {
    let mut file = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut file, value)?;
    writeln!(file)?;
    file.flush()?;
    Ok(path.to_path_buf())
}
