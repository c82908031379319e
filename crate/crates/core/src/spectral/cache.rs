// SPDX-License-Identifier: MIT OR Apache-2.0

//! On-disk cache of eigenfamilies keyed by shape and resolution.
//!
//! Layout: 8-byte magic, little-endian `u32` format version, then a bincode
//! payload. Files with another version are ignored by [`load`].

use super::families::EigenFamily;
use super::grid::ReferenceShape;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 8] = b"DCEIGEN\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Payload {
    key: String,
    families: Vec<EigenFamily>,
}

pub fn cache_key(shape: &ReferenceShape, n: usize) -> String {
    format!("{}@{}", shape.tag(), n)
}

pub fn save(path: &Path, shape: &ReferenceShape, n: usize, families: &[EigenFamily]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    let payload = Payload { key: cache_key(shape, n), families: families.to_vec() };
    bincode::serialize_into(&mut w, &payload).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    w.flush()?;
    Ok(())
}

/// Returns `None` on a missing file, foreign magic, version mismatch or key mismatch.
pub fn load(path: &Path, shape: &ReferenceShape, n: usize) -> Result<Option<Vec<EigenFamily>>> {
    let Ok(f) = File::open(path) else { return Ok(None) };
    let mut r = BufReader::new(f);
    let mut head = [0u8; 12];
    if r.read_exact(&mut head).is_err() || &head[..8] != MAGIC {
        return Ok(None);
    }
    if u32::from_le_bytes([head[8], head[9], head[10], head[11]]) != FORMAT_VERSION {
        return Ok(None);
    }
    let payload: Payload = match bincode::deserialize_from(&mut r) {
        Ok(p) => p,
        Err(_) => return Ok(None),
    };
    Ok((payload.key == cache_key(shape, n)).then_some(payload.families))
}
