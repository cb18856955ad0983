//! Plain-text export of iteration outputs, one file per output name.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::outputs::OutputValue;
use super::record::RunRecord;
use crate::{Error, Result};

/// Writes `<dir>/<name>.txt` for every requested name: one row per iteration,
/// values separated by single spaces, reals with 17 significant digits.
///
/// Names must appear among the record's iteration outputs. A record without
/// iterations has no declared names available, so any name is accepted and
/// produces an empty file.
pub fn write_readable_outputs(record: &RunRecord, names: &[&str], dir: &Path) -> Result<Vec<PathBuf>> {
    let first = record.iterations().next();
    if let Some(it) = first {
        for name in names {
            if it.get(name).is_none() {
                return Err(Error::UndeclaredOutput(name.to_string()));
            }
        }
    }
    fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(names.len());
    for name in names {
        let path = dir.join(format!("{name}.txt"));
        let mut out = BufWriter::new(fs::File::create(&path)?);
        for it in record.iterations() {
            let value = it
                .get(name)
                .ok_or_else(|| Error::UndeclaredOutput(name.to_string()))?;
            writeln!(out, "{}", format_row(value))?;
        }
        out.flush()?;
        paths.push(path);
    }
    Ok(paths)
}

fn format_row(value: &OutputValue) -> String {
    match value {
        OutputValue::Int(i) => i.to_string(),
        OutputValue::Real(r) => format!("{r:.16e}"),
        OutputValue::Vector(v) => v.iter().map(|r| format!("{r:.16e}")).collect::<Vec<_>>().join(" "),
    }
}
