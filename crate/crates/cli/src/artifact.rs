//! On-disk container for persisted artifacts: a fixed header naming the
//! format version, artifact kind and token system, then the payload.

use std::fs;
use std::io::ErrorKind;
use std::path::Path;

use crate::error::{Result, SimError};
use crate::scenario::SystemKind;

pub const MAGIC: [u8; 4] = *b"AIDS";
pub const FORMAT_VERSION: u8 = 1;
const HEADER_LEN: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum ArtifactKind {
    RsKey = 1,
    PublicKey = 2,
    Households = 3,
    Blocklist = 4,
    Log = 5,
    Audit = 6,
}

impl ArtifactKind {
    fn from_byte(b: u8) -> Option<Self> {
        use ArtifactKind::*;
        [RsKey, PublicKey, Households, Blocklist, Log, Audit]
            .into_iter()
            .find(|k| *k as u8 == b)
    }
}

fn system_byte(system: SystemKind) -> u8 {
    match system {
        SystemKind::Card => 1,
        SystemKind::Phone => 2,
    }
}

pub fn write(path: &Path, kind: ArtifactKind, system: SystemKind, payload: &[u8]) -> Result<()> {
    let mut bytes = Vec::with_capacity(HEADER_LEN + payload.len());
    bytes.extend_from_slice(&MAGIC);
    bytes.extend_from_slice(&[FORMAT_VERSION, kind as u8, system_byte(system)]);
    bytes.extend_from_slice(payload);
    write_bytes(path, &bytes)
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| SimError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| match source.kind() {
        ErrorKind::NotFound => SimError::Missing(path.to_path_buf()),
        _ => SimError::Io {
            path: path.to_path_buf(),
            source,
        },
    })
}

/// Reads an artifact and returns its payload after checking the header.
pub fn read(path: &Path, kind: ArtifactKind, system: SystemKind) -> Result<Vec<u8>> {
    let mut bytes = read_bytes(path)?;
    if bytes.len() < HEADER_LEN || bytes[..4] != MAGIC {
        return Err(SimError::corrupt(path, "not an aidsim artifact"));
    }
    if bytes[4] != FORMAT_VERSION {
        return Err(SimError::Version {
            path: path.to_path_buf(),
            found: bytes[4],
            expected: FORMAT_VERSION,
        });
    }
    match ArtifactKind::from_byte(bytes[5]) {
        Some(k) if k == kind => {}
        found => {
            return Err(SimError::corrupt(
                path,
                format!("expected a {kind:?} artifact, found {found:?}"),
            ))
        }
    }
    if bytes[6] != system_byte(system) {
        return Err(SimError::corrupt(
            path,
            format!("artifact is not for the {system} system"),
        ));
    }
    bytes.drain(..HEADER_LEN);
    Ok(bytes)
}
