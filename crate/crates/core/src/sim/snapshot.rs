//! Binary occupation snapshots.
//!
//! Layout, little-endian: magic `TSNP`, `n: u64`, `i_min: i64`,
//! `i_max: i64`, `t: f64`, then `ceil((i_max - i_min + 1) / 8)` bytes of
//! occupations packed least significant bit first.

use std::io::{Read, Write};

use thiserror::Error;

use super::engine::Snapshot;

const MAGIC: &[u8; 4] = b"TSNP";
const HEADER: usize = 4 + 8 * 4;

#[derive(Debug, Error)]
pub enum SnapshotFormatError {
    #[error("not a snapshot (bad magic)")]
    Magic,
    #[error("window {i_min}..={i_max} is empty or too large")]
    Window { i_min: i64, i_max: i64 },
    #[error("truncated snapshot: expected {expected} bytes, got {got}")]
    Truncated { expected: usize, got: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupationSnapshot {
    pub n: u64,
    pub i_min: i64,
    pub i_max: i64,
    pub t: f64,
    pub eta: Vec<u8>,
}

impl From<&Snapshot> for OccupationSnapshot {
    fn from(s: &Snapshot) -> Self {
        OccupationSnapshot {
            n: s.n,
            i_min: s.i_min,
            i_max: s.i_max(),
            t: s.t,
            eta: s.eta.clone(),
        }
    }
}

impl OccupationSnapshot {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER + self.eta.len().div_ceil(8));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&self.n.to_le_bytes());
        out.extend_from_slice(&self.i_min.to_le_bytes());
        out.extend_from_slice(&self.i_max.to_le_bytes());
        out.extend_from_slice(&self.t.to_le_bytes());
        for chunk in self.eta.chunks(8) {
            let byte = chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (b, &e)| acc | (u8::from(e != 0) << b));
            out.push(byte);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SnapshotFormatError> {
        if bytes.len() < HEADER {
            return Err(SnapshotFormatError::Truncated {
                expected: HEADER,
                got: bytes.len(),
            });
        }
        if &bytes[..4] != MAGIC {
            return Err(SnapshotFormatError::Magic);
        }
        let word = |k: usize| <[u8; 8]>::try_from(&bytes[4 + 8 * k..12 + 8 * k]).unwrap();
        let n = u64::from_le_bytes(word(0));
        let i_min = i64::from_le_bytes(word(1));
        let i_max = i64::from_le_bytes(word(2));
        let t = f64::from_le_bytes(word(3));
        let sites = i_max
            .checked_sub(i_min)
            .and_then(|d| usize::try_from(d).ok())
            .and_then(|d| d.checked_add(1))
            .filter(|&m| m <= (1usize << 40))
            .ok_or(SnapshotFormatError::Window { i_min, i_max })?;
        let expected = HEADER + sites.div_ceil(8);
        if bytes.len() != expected {
            return Err(SnapshotFormatError::Truncated {
                expected,
                got: bytes.len(),
            });
        }
        let packed = &bytes[HEADER..];
        let eta = (0..sites).map(|k| (packed[k / 8] >> (k % 8)) & 1).collect();
        Ok(OccupationSnapshot {
            n,
            i_min,
            i_max,
            t,
            eta,
        })
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), SnapshotFormatError> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, SnapshotFormatError> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        Self::from_bytes(&buf)
    }
}
