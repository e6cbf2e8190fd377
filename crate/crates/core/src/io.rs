//! Export primitives shared by all table writers.
//!
//! Floating-point columns are written as `{:.16e}` (17 significant
//! digits), which round-trips every finite `f64` exactly; re-importing an
//! exported table therefore reproduces the original values bit for bit.

use std::io::Write;
use std::path::Path;

/// Full-precision float formatting used in every exported table.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a CSV table: a header row and string-formatted records.
pub fn write_csv<P, R>(path: P, header: &[&str], rows: R) -> std::io::Result<()>
where
    P: AsRef<Path>,
    R: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_path(path.as_ref())
        .map_err(std::io::Error::other)?;
    w.write_record(header).map_err(std::io::Error::other)?;
    for row in rows {
        w.write_record(&row).map_err(std::io::Error::other)?;
    }
    w.flush()
}

/// Reads a CSV table written by [`write_csv`]; returns the header and all
/// records as strings.
pub fn read_csv<P: AsRef<Path>>(path: P) -> std::io::Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_path(path.as_ref()).map_err(std::io::Error::other)?;
    let header = r
        .headers()
        .map_err(std::io::Error::other)?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(std::io::Error::other)?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

/// Writes a serde-serialisable document as pretty JSON.
pub fn write_json<P: AsRef<Path>, T: serde::Serialize>(path: P, value: &T) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    f.write_all(b"\n")
}
