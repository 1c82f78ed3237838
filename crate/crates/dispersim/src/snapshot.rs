//! Binary field snapshots.
//!
//! Layout: a 32-byte header — magic `DSPF`, version `u32`, `n1 u32`,
//! `n2 u32`, `l1 f64`, `l2 f64`, all little-endian — followed by `n1·n2`
//! physical samples as little-endian `f64` pairs `(re, im)`, row-major with
//! axis 1 contiguous.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use thiserror::Error;

use crate::grid::{Grid2D, GridError, SpectralField};

const MAGIC: [u8; 4] = *b"DSPF";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 32;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("not a field snapshot (bad magic)")]
    BadMagic,
    #[error("unsupported snapshot version {0}")]
    UnsupportedVersion(u32),
    #[error("snapshot truncated: expected {expected} bytes, got {got}")]
    Truncated { expected: usize, got: usize },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Serializes the physical samples of a field.
pub fn encode(u: &SpectralField) -> Vec<u8> {
    let phys = u.to_physical();
    let grid = phys.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * grid.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.n1() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.n2() as u32).to_le_bytes());
    out.extend_from_slice(&grid.l1().to_le_bytes());
    out.extend_from_slice(&grid.l2().to_le_bytes());
    for v in phys.values() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

/// Parses a snapshot buffer back into a physical-representation field.
pub fn decode(bytes: &[u8]) -> Result<SpectralField, SnapshotError> {
    if bytes.len() < HEADER_LEN {
        return Err(SnapshotError::Truncated { expected: HEADER_LEN, got: bytes.len() });
    }
    if bytes[0..4] != MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(SnapshotError::UnsupportedVersion(version));
    }
    let n1 = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let n2 = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let l1 = f64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let l2 = f64::from_le_bytes(bytes[24..32].try_into().unwrap());
    let grid = Grid2D::new(n1, n2, l1, l2)?;

    let expected = HEADER_LEN + 16 * grid.len();
    if bytes.len() != expected {
        return Err(SnapshotError::Truncated { expected, got: bytes.len() });
    }
    let mut values = Vec::with_capacity(grid.len());
    for chunk in bytes[HEADER_LEN..].chunks_exact(16) {
        let re = f64::from_le_bytes(chunk[0..8].try_into().unwrap());
        let im = f64::from_le_bytes(chunk[8..16].try_into().unwrap());
        values.push(Complex64::new(re, im));
    }
    Ok(SpectralField::from_physical(grid, values))
}

/// Writes a field snapshot to disk.
pub fn write_field(path: impl AsRef<Path>, u: &SpectralField) -> Result<(), SnapshotError> {
    fs::write(path, encode(u))?;
    Ok(())
}

/// Reads a field snapshot from disk.
pub fn read_field(path: impl AsRef<Path>) -> Result<SpectralField, SnapshotError> {
    decode(&fs::read(path)?)
}
