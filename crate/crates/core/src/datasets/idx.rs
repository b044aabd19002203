//! IDX container format used by the MNIST distribution.
//!
//! Layout: a big-endian magic `0x0000_08DD` (`08` = unsigned byte payload,
//! `DD` = number of dimensions), one big-endian `u32` per dimension, then
//! the payload in row-major order.

use std::path::Path;

use crate::error::{Error, ParseErrorKind, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

/// Stack of grayscale images sharing one size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn image_len(&self) -> usize {
        self.rows * self.cols
    }

    /// Row-major pixels of image `i`.
    pub fn image(&self, i: usize) -> &[u8] {
        let len = self.image_len();
        &self.pixels[i * len..(i + 1) * len]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u8]> + '_ {
        self.pixels.chunks_exact(self.image_len().max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdxData {
    Images(IdxImages),
    Labels(Vec<u8>),
}

fn parse_err(offset: usize, kind: ParseErrorKind) -> Error {
    Error::Parse { offset, kind }
}

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes(b.try_into().unwrap()))
        .ok_or_else(|| parse_err(bytes.len(), ParseErrorKind::TruncatedHeader))
}

/// Parses an image (3-D) or label (1-D) IDX file.
pub fn parse_idx(bytes: &[u8]) -> Result<IdxData> {
    let magic = read_u32(bytes, 0)?;
    let dims = match magic {
        IMAGES_MAGIC => 3,
        LABELS_MAGIC => 1,
        other => return Err(parse_err(0, ParseErrorKind::BadMagic(other))),
    };
    let mut sizes = [0usize; 3];
    for (d, size) in sizes.iter_mut().enumerate().take(dims) {
        *size = read_u32(bytes, 4 + 4 * d)? as usize;
    }
    let header = 4 + 4 * dims;
    let expected = sizes[..dims]
        .iter()
        .try_fold(1usize, |acc, &s| acc.checked_mul(s))
        .ok_or_else(|| {
            parse_err(4, ParseErrorKind::DimensionMismatch("payload size overflows".into()))
        })?;
    let payload = &bytes[header..];
    if payload.len() < expected {
        return Err(parse_err(
            header,
            ParseErrorKind::TruncatedPayload {
                expected,
                found: payload.len(),
            },
        ));
    }
    if payload.len() > expected {
        return Err(parse_err(
            header + expected,
            ParseErrorKind::DimensionMismatch(format!(
                "{} bytes after the declared payload",
                payload.len() - expected
            )),
        ));
    }
    match dims {
        3 => Ok(IdxData::Images(IdxImages {
            count: sizes[0],
            rows: sizes[1],
            cols: sizes[2],
            pixels: payload.to_vec(),
        })),
        _ => {
            if let Some(i) = payload.iter().position(|&l| l > 9) {
                return Err(parse_err(header + i, ParseErrorKind::BadLabel(payload[i])));
            }
            Ok(IdxData::Labels(payload.to_vec()))
        }
    }
}

/// Serializes back to the IDX byte layout.
pub fn encode_idx(data: &IdxData) -> Vec<u8> {
    let mut out = Vec::new();
    match data {
        IdxData::Images(img) => {
            out.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
            for d in [img.count, img.rows, img.cols] {
                out.extend_from_slice(&(d as u32).to_be_bytes());
            }
            out.extend_from_slice(&img.pixels);
        }
        IdxData::Labels(labels) => {
            out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
            out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
            out.extend_from_slice(labels);
        }
    }
    out
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

fn located(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { offset, kind } => Error::InvalidArgument(format!(
            "{}: IDX parse error at byte {offset}: {kind}",
            path.display()
        )),
        other => other,
    }
}

pub fn read_images(path: &Path) -> Result<IdxImages> {
    match parse_idx(&read_file(path)?).map_err(|e| located(path, e))? {
        IdxData::Images(img) => Ok(img),
        IdxData::Labels(_) => Err(Error::InvalidArgument(format!(
            "{}: expected an image file, found labels",
            path.display()
        ))),
    }
}

pub fn read_labels(path: &Path) -> Result<Vec<u8>> {
    match parse_idx(&read_file(path)?).map_err(|e| located(path, e))? {
        IdxData::Labels(l) => Ok(l),
        IdxData::Images(_) => Err(Error::InvalidArgument(format!(
            "{}: expected a label file, found images",
            path.display()
        ))),
    }
}
