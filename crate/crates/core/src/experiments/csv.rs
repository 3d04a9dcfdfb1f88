use std::io::Write;
use std::path::Path;

use super::harness::{sort_rows, ResultRow};
use crate::{Error, Result};

pub const HEADER: &str = "scenario,sweep,sweep_value,metric,mean,std,ci95,trials,drops,seed";

/// 17 significant digits, enough to round-trip an f64.
fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `rows` as CSV in canonical order. Unswept rows leave `sweep` and
/// `sweep_value` empty.
pub fn emit_csv<W: Write>(rows: &[ResultRow], mut out: W) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptyRows);
    }
    let mut rows = rows.to_vec();
    sort_rows(&mut rows);
    writeln!(out, "{HEADER}")?;
    for r in &rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.scenario,
            r.sweep.as_deref().unwrap_or(""),
            r.sweep_value.map(float).unwrap_or_default(),
            r.metric,
            float(r.mean),
            float(r.std),
            float(r.ci95),
            r.trials,
            r.drops,
            r.seed
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_csv_file(rows: &[ResultRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptyRows);
    }
    let file = std::fs::File::create(path)?;
    emit_csv(rows, std::io::BufWriter::new(file))
}
