//! Public revocation lists with an order-independent digest.
//!
//! Entries are kept sorted by their encoded bytes and deduplicated, so the
//! digest depends only on the set of revoked entries.

use std::collections::BTreeMap;
use std::fmt;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::crypto::encoding::{DecodeError, Decoder, Encoder, Wire};

pub const BL_HASH_LEN: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum EntryKind {
    /// 32-byte random revocation value held by a card.
    CardValue = 0x01,
    /// Pair `(h, H)` of G1 elements; a phone is revoked when `H = h^{r_H}`.
    PhonePair = 0x02,
}

impl EntryKind {
    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0x01 => Some(EntryKind::CardValue),
            0x02 => Some(EntryKind::PhonePair),
            _ => None,
        }
    }
}

impl fmt::Display for EntryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntryKind::CardValue => "card value",
            EntryKind::PhonePair => "phone pair",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BlocklistError {
    #[error("blocklist holds {expected} entries, got a {found} entry")]
    KindMismatch {
        expected: EntryKind,
        found: EntryKind,
    },
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

pub trait BlocklistEntry: Clone + fmt::Debug + Sized {
    const KIND: EntryKind;

    fn entry_bytes(&self) -> Vec<u8>;
    fn from_entry_bytes(bytes: &[u8]) -> Result<Self, DecodeError>;
}

#[derive(Clone)]
pub struct Blocklist<E: BlocklistEntry> {
    entries: BTreeMap<Vec<u8>, E>,
    digest: [u8; BL_HASH_LEN],
}

impl<E: BlocklistEntry> fmt::Debug for Blocklist<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Blocklist")
            .field("kind", &E::KIND)
            .field("len", &self.entries.len())
            .field("digest", &hex_prefix(&self.digest))
            .finish()
    }
}

fn hex_prefix(d: &[u8]) -> String {
    d[..6].iter().map(|b| format!("{b:02x}")).collect()
}

impl<E: BlocklistEntry> PartialEq for Blocklist<E> {
    fn eq(&self, other: &Self) -> bool {
        self.digest == other.digest
    }
}

impl<E: BlocklistEntry> Eq for Blocklist<E> {}

impl<E: BlocklistEntry> Default for Blocklist<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E: BlocklistEntry> Blocklist<E> {
    pub fn new() -> Self {
        let mut bl = Blocklist {
            entries: BTreeMap::new(),
            digest: [0; BL_HASH_LEN],
        };
        bl.rehash();
        bl
    }

    pub fn from_entries<I: IntoIterator<Item = E>>(entries: I) -> Self {
        let mut bl = Blocklist {
            entries: entries.into_iter().map(|e| (e.entry_bytes(), e)).collect(),
            digest: [0; BL_HASH_LEN],
        };
        bl.rehash();
        bl
    }

    /// Adds an entry; returns false if it was already present.
    pub fn revoke(&mut self, entry: E) -> bool {
        let fresh = self.entries.insert(entry.entry_bytes(), entry).is_none();
        if fresh {
            self.rehash();
        }
        fresh
    }

    /// Adds an entry given in its tagged encoding, checking its kind first.
    pub fn revoke_encoded(
        &mut self,
        kind: EntryKind,
        bytes: &[u8],
    ) -> Result<bool, BlocklistError> {
        if kind != E::KIND {
            return Err(BlocklistError::KindMismatch {
                expected: E::KIND,
                found: kind,
            });
        }
        Ok(self.revoke(E::from_entry_bytes(bytes)?))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = &E> {
        self.entries.values()
    }

    pub fn contains_bytes(&self, bytes: &[u8]) -> bool {
        self.entries.contains_key(bytes)
    }

    pub fn digest(&self) -> [u8; BL_HASH_LEN] {
        self.digest
    }

    fn rehash(&mut self) {
        self.digest = Sha256::digest(self.to_bytes()).into();
    }
}

/// SHA-256 of the canonical encoding.
pub fn blocklist_hash<E: BlocklistEntry>(bl: &Blocklist<E>) -> [u8; BL_HASH_LEN] {
    bl.digest()
}

impl<E: BlocklistEntry> Wire for Blocklist<E> {
    fn encode(&self, enc: &mut Encoder) {
        enc.field(&[E::KIND as u8]).u32(self.entries.len() as u32);
        for bytes in self.entries.keys() {
            enc.field(bytes);
        }
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let [kind] = dec.fixed::<1>()?;
        if kind != E::KIND as u8 {
            return Err(DecodeError::Invalid("blocklist entry kind"));
        }
        let count = dec.u32()?;
        let mut entries = BTreeMap::new();
        let mut prev: Option<&[u8]> = None;
        for _ in 0..count {
            let bytes = dec.field()?;
            if prev.is_some_and(|p| p >= bytes) {
                return Err(DecodeError::Invalid("blocklist order"));
            }
            prev = Some(bytes);
            entries.insert(bytes.to_vec(), E::from_entry_bytes(bytes)?);
        }
        let mut bl = Blocklist {
            entries,
            digest: [0; BL_HASH_LEN],
        };
        bl.rehash();
        Ok(bl)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::{RngCore, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    #[derive(Debug, Clone, PartialEq)]
    struct Raw([u8; 4]);

    impl BlocklistEntry for Raw {
        const KIND: EntryKind = EntryKind::CardValue;
        fn entry_bytes(&self) -> Vec<u8> {
            self.0.to_vec()
        }
        fn from_entry_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
            Ok(Raw(bytes
                .try_into()
                .map_err(|_| DecodeError::Invalid("entry"))?))
        }
    }

    #[test]
    fn empty_digest_is_hash_of_fixed_encoding() {
        // version, kind field, count field
        let canonical = [1u8, 0, 0, 0, 1, 1, 0, 0, 0, 4, 0, 0, 0, 0];
        let expected: [u8; 32] = Sha256::digest(canonical).into();
        assert_eq!(blocklist_hash(&Blocklist::<Raw>::new()), expected);
    }

    #[test]
    fn permutation_invariant_digest() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let mut items: Vec<Raw> = (0..50)
            .map(|_| {
                let mut b = [0u8; 4];
                rng.fill_bytes(&mut b);
                Raw(b)
            })
            .collect();
        // Oracle: sort the raw bytes, encode by hand, hash.
        let mut sorted: Vec<[u8; 4]> = items.iter().map(|r| r.0).collect();
        sorted.sort();
        sorted.dedup();
        let mut manual = vec![1u8, 0, 0, 0, 1, 1, 0, 0, 0, 4];
        manual.extend_from_slice(&(sorted.len() as u32).to_be_bytes());
        for s in &sorted {
            manual.extend_from_slice(&4u32.to_be_bytes());
            manual.extend_from_slice(s);
        }
        let oracle: [u8; 32] = Sha256::digest(&manual).into();
        for _ in 0..5 {
            items.shuffle(&mut rng);
            assert_eq!(Blocklist::from_entries(items.clone()).digest(), oracle);
        }
    }

    #[test]
    fn revoke_is_idempotent_and_changes_digest() {
        let mut bl = Blocklist::<Raw>::new();
        let d0 = bl.digest();
        assert!(bl.revoke(Raw([1, 2, 3, 4])));
        let d1 = bl.digest();
        assert_ne!(d0, d1);
        assert!(!bl.revoke(Raw([1, 2, 3, 4])));
        assert_eq!(bl.digest(), d1);
        assert_eq!(bl.len(), 1);
    }

    #[test]
    fn kind_mismatch_is_an_error() {
        let mut bl = Blocklist::<Raw>::new();
        assert_eq!(
            bl.revoke_encoded(EntryKind::PhonePair, &[0; 4]),
            Err(BlocklistError::KindMismatch {
                expected: EntryKind::CardValue,
                found: EntryKind::PhonePair
            })
        );
        assert_eq!(bl.revoke_encoded(EntryKind::CardValue, &[0; 4]), Ok(true));
    }

    #[test]
    fn wire_round_trip_and_order_check() {
        let bl = Blocklist::from_entries([Raw([9; 4]), Raw([1; 4]), Raw([5; 4])]);
        let bytes = bl.to_bytes();
        assert_eq!(Blocklist::<Raw>::from_bytes(&bytes).unwrap(), bl);
        // Swap the first two entries: no longer canonical.
        let mut swapped = bytes.clone();
        let first = 14..22;
        let second = 22..30;
        let a = swapped[first.clone()].to_vec();
        let b = swapped[second.clone()].to_vec();
        swapped[first].copy_from_slice(&b);
        swapped[second].copy_from_slice(&a);
        assert!(Blocklist::<Raw>::from_bytes(&swapped).is_err());
    }
}
