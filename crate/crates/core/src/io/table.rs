use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::Result;

/// A row type with a fixed header. Column names end in their unit.
pub trait CsvRow: Serialize {
    const HEADER: &'static [&'static str];
}

/// Writes `rows` under `T::HEADER`, so an empty scan still produces a
/// header line. Floats are written in shortest round-trip form.
pub fn write_scan_csv<T: CsvRow>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(T::HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_scan_csv<T: DeserializeOwned>(path: &Path) -> Result<(Vec<String>, Vec<T>)> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.iter().map(str::to_string).collect();
    let rows = r.deserialize().collect::<std::result::Result<Vec<T>, _>>()?;
    Ok((header, rows))
}
