//! Binary field snapshots.
//!
//! Layout:
//!
//! | bytes     | content                                                    |
//! |-----------|------------------------------------------------------------|
//! | 0..12     | magic `PATCHFLOW\0\0\0`                                    |
//! | 12..16    | format version, `u32` little endian                        |
//! | 16..272   | UTF-8 JSON header `{"n","L","name","t"}`, space padded     |
//! | 272..     | `n*n` little-endian `f64`, row-major (`y` rows, `x` cols)  |

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Grid2D, ScalarField};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 12] = b"PATCHFLOW\0\0\0";
pub const VERSION: u32 = 1;
pub const HEADER_TEXT_LEN: usize = 256;
pub const DATA_OFFSET: usize = 16 + HEADER_TEXT_LEN;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
    pub name: String,
    pub t: f64,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub header: SnapshotHeader,
    pub field: ScalarField,
}

pub fn encode(field: &ScalarField, name: &str, t: f64) -> Result<Vec<u8>> {
    let grid = field.grid();
    let header = SnapshotHeader {
        n: grid.n(),
        length: grid.length(),
        name: name.to_string(),
        t,
    };
    let text = serde_json::to_string(&header).expect("header serialises");
    if text.len() > HEADER_TEXT_LEN {
        return Err(Error::Snapshot {
            path: PathBuf::new(),
            message: format!("header too long ({} bytes); shorten the field name", text.len()),
        });
    }
    let mut out = Vec::with_capacity(DATA_OFFSET + 8 * grid.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(text.as_bytes());
    out.resize(DATA_OFFSET, b' ');
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<Snapshot> {
    let bad = |message: String| Error::Snapshot {
        path: path.to_path_buf(),
        message,
    };
    if bytes.len() < DATA_OFFSET || &bytes[..12] != MAGIC {
        return Err(bad("missing magic".into()));
    }
    let version = u32::from_le_bytes(bytes[12..16].try_into().unwrap());
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let text = std::str::from_utf8(&bytes[16..DATA_OFFSET])
        .map_err(|e| bad(format!("header is not UTF-8: {e}")))?;
    let header: SnapshotHeader =
        serde_json::from_str(text.trim_end()).map_err(|e| bad(format!("bad header: {e}")))?;
    let grid = Grid2D::new(header.n, header.length).map_err(|e| bad(e.to_string()))?;
    let data = &bytes[DATA_OFFSET..];
    if data.len() != 8 * grid.len() {
        return Err(bad(format!(
            "expected {} data bytes, found {}",
            8 * grid.len(),
            data.len()
        )));
    }
    let values = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Snapshot {
        field: ScalarField::new(&grid, values)?,
        header,
    })
}

pub fn write(path: &Path, field: &ScalarField, name: &str, t: f64) -> Result<()> {
    let bytes = encode(field, name, t)?;
    let mut file = fs::File::create(path)?;
    file.write_all(&bytes)?;
    Ok(())
}

pub fn read(path: &Path) -> Result<Snapshot> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes, path)
}
