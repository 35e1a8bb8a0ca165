//! Binary snapshot files.
//!
//! Layout (all little-endian):
//!
//! | offset | size | content                    |
//! |--------|------|----------------------------|
//! | 0      | 4    | magic `EALN`               |
//! | 4      | 4    | format version (`u32`)     |
//! | 8      | 8    | `n_points` (`u64`)         |
//! | 16     | 8    | `alpha` (`f64`)            |
//! | 24     | 8    | `t` (`f64`)                |
//! | 32     | 8    | mass `M` (`f64`)           |
//! | 40     | 8n   | `u` samples                |
//! | 40+8n  | 8n   | `ρ` samples                |
//! | 40+16n | 8n   | `e` samples                |

use std::path::Path;

use super::state::{compute_derived, State};
use crate::error::{Error, Result};
use crate::spectral::{Field, TorusGrid};

pub const SNAPSHOT_MAGIC: [u8; 4] = *b"EALN";
pub const SNAPSHOT_VERSION: u32 = 1;
pub const SNAPSHOT_HEADER_BYTES: usize = 40;

/// Contents of a snapshot file.
#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotFile {
    pub state: State,
    pub mass: f64,
    pub e: Field,
}

pub fn encode_snapshot(state: &State) -> Result<Vec<u8>> {
    let e = compute_derived(state)?.e;
    let n = state.u.len();
    let mut out = Vec::with_capacity(SNAPSHOT_HEADER_BYTES + 24 * n);
    out.extend_from_slice(&SNAPSHOT_MAGIC);
    out.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&state.alpha.to_le_bytes());
    out.extend_from_slice(&state.t.to_le_bytes());
    out.extend_from_slice(&state.mass().to_le_bytes());
    for field in [&state.u, &state.rho, &e] {
        for v in field.samples() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

fn read_f64(bytes: &[u8], offset: usize) -> f64 {
    f64::from_le_bytes(bytes[offset..offset + 8].try_into().unwrap())
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<SnapshotFile> {
    if bytes.len() < SNAPSHOT_HEADER_BYTES {
        return Err(Error::Format(format!(
            "snapshot truncated: {} bytes, header needs {SNAPSHOT_HEADER_BYTES}",
            bytes.len()
        )));
    }
    if bytes[0..4] != SNAPSHOT_MAGIC {
        return Err(Error::Format("not a snapshot file (bad magic)".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != SNAPSHOT_VERSION {
        return Err(Error::Format(format!(
            "unsupported snapshot version {version}, expected {SNAPSHOT_VERSION}"
        )));
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let n = usize::try_from(n).map_err(|_| Error::Format(format!("n_points {n} too large")))?;
    let expected = n
        .checked_mul(24)
        .and_then(|b| b.checked_add(SNAPSHOT_HEADER_BYTES))
        .ok_or_else(|| Error::Format(format!("n_points {n} too large")))?;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "snapshot length {} does not match n_points {n} (expected {expected})",
            bytes.len()
        )));
    }
    let grid = TorusGrid::new(n)?;
    let alpha = read_f64(bytes, 16);
    let t = read_f64(bytes, 24);
    let mass = read_f64(bytes, 32);
    let array = |k: usize| {
        let start = SNAPSHOT_HEADER_BYTES + 8 * n * k;
        (0..n)
            .map(|j| read_f64(bytes, start + 8 * j))
            .collect::<Vec<f64>>()
    };
    let u = Field::new(&grid, array(0))?;
    let rho = Field::new(&grid, array(1))?;
    let e = Field::new(&grid, array(2))?;
    let state = State::new(u, rho, t, alpha)?;
    Ok(SnapshotFile { state, mass, e })
}

pub fn save_snapshot(path: impl AsRef<Path>, state: &State) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_snapshot(state)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<SnapshotFile> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_snapshot(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state() -> State {
        let g = TorusGrid::new(32).unwrap();
        let u = Field::from_fn(&g, |x| (3.0 * x).sin() + 0.1);
        let rho = Field::from_fn(&g, |x| 1.0 + 0.2 * x.cos());
        State::new(u, rho, 0.375, 0.8).unwrap()
    }

    #[test]
    fn round_trip_bit_exact() {
        let s = state();
        let bytes = encode_snapshot(&s).unwrap();
        assert_eq!(bytes.len(), SNAPSHOT_HEADER_BYTES + 24 * 32);
        let back = decode_snapshot(&bytes).unwrap();
        assert_eq!(back.state, s);
        assert_eq!(back.mass.to_bits(), s.mass().to_bits());
    }

    #[test]
    fn rejects_version_truncation_and_magic() {
        let bytes = encode_snapshot(&state()).unwrap();
        let mut bumped = bytes.clone();
        bumped[4..8].copy_from_slice(&(SNAPSHOT_VERSION + 1).to_le_bytes());
        assert!(matches!(decode_snapshot(&bumped), Err(Error::Format(_))));
        assert!(decode_snapshot(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode_snapshot(&bytes[..10]).is_err());
        let mut bad = bytes;
        bad[0] = b'X';
        assert!(decode_snapshot(&bad).is_err());
    }

    proptest::proptest! {
        #[test]
        fn random_states_round_trip(
            seed in proptest::collection::vec(-1.0f64..1.0, 16),
            t in 0.0f64..100.0,
            alpha in 0.05f64..1.95,
        ) {
            let g = TorusGrid::new(16).unwrap();
            let u = Field::new(&g, seed.clone()).unwrap();
            let rho = Field::new(&g, seed.iter().map(|v| 1.5 + v).collect()).unwrap();
            let s = State::new(u, rho, t, alpha).unwrap();
            let back = decode_snapshot(&encode_snapshot(&s).unwrap()).unwrap().state;
            proptest::prop_assert_eq!(back.u.samples(), s.u.samples());
            proptest::prop_assert_eq!(back.rho.samples(), s.rho.samples());
            proptest::prop_assert_eq!(back.t.to_bits(), t.to_bits());
            proptest::prop_assert_eq!(back.alpha.to_bits(), alpha.to_bits());
        }
    }
}
