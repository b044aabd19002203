//! CSV output with fixed headers.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Serializes `rows` (header from the row type's field names).
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    w.into_inner()
        .map_err(|e| Error::InvalidArgument(format!("csv buffer: {e}")))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let bytes = to_csv(rows)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
