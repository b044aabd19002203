//! Recorded device measurements.
//!
//! Little-endian layout: magic `QSKR`, `u32` pair count `m`, `u32` record
//! count, then each record's `2m` raw intensities as `f64`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::sketch::RopSketch;

pub const MAGIC: [u8; 4] = *b"QSKR";
const HEADER_LEN: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct SketchFile {
    pub pairs: usize,
    pub records: Vec<RopSketch>,
}

impl SketchFile {
    pub fn new(pairs: usize, records: Vec<RopSketch>) -> Result<Self> {
        if let Some(i) = records.iter().position(|r| r.len() != 2 * pairs) {
            return Err(Error::SketchFile(format!(
                "record {i} has {} values, expected {}",
                records[i].len(),
                2 * pairs
            )));
        }
        Ok(Self { pairs, records })
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.records.len() * 16 * self.pairs);
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&(self.pairs as u32).to_le_bytes());
        out.extend_from_slice(&(self.records.len() as u32).to_le_bytes());
        for r in &self.records {
            for v in r.values() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::SketchFile("truncated header".into()));
        }
        if bytes[..4] != MAGIC {
            return Err(Error::SketchFile(format!("bad magic {:?}", &bytes[..4])));
        }
        let pairs = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let count = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        if pairs == 0 {
            return Err(Error::SketchFile("pair count is zero".into()));
        }
        let expected = count * 2 * pairs * 8;
        let payload = &bytes[HEADER_LEN..];
        if payload.len() != expected {
            return Err(Error::SketchFile(format!(
                "payload holds {} bytes, header declares {expected}",
                payload.len()
            )));
        }
        let records = payload
            .chunks_exact(16 * pairs)
            .map(|rec| {
                let values = rec
                    .chunks_exact(8)
                    .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                    .collect();
                RopSketch::new(values).map_err(|e| Error::SketchFile(e.to_string()))
            })
            .collect::<Result<_>>()?;
        Ok(Self { pairs, records })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::decode(&bytes)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode()).map_err(|e| Error::io(path, e))
    }
}
