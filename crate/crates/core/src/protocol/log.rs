//! Per-epoch transaction log with tag-unique insertion.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use blstrs::Scalar;
use parking_lot::Mutex;
use thiserror::Error;

use super::audit::AuditProof;
use super::AidScheme;
use crate::blocklist::BL_HASH_LEN;
use crate::crypto::encoding::{DecodeError, Decoder, Encoder, Wire};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertOutcome {
    Accepted,
    Duplicate,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AuditError {
    #[error("epoch {0} holds records accepted under different blocklists")]
    MixedBlocklist(u64),
    #[error("entitlement sum overflows")]
    Overflow,
}

/// One accepted showup and the blocklist digest it was checked against.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRecord<S: AidScheme> {
    pub showup: S::Showup,
    pub bl_hash: [u8; BL_HASH_LEN],
}

#[derive(Debug)]
struct EpochLog<S: AidScheme> {
    tags: HashSet<Vec<u8>>,
    records: Vec<LogRecord<S>>,
}

impl<S: AidScheme> Default for EpochLog<S> {
    fn default() -> Self {
        EpochLog {
            tags: HashSet::new(),
            records: Vec::new(),
        }
    }
}

/// Shared between station workers; each insert is an atomic check-and-insert
/// on the household tag.
#[derive(Debug)]
pub struct TransactionLog<S: AidScheme> {
    epochs: Mutex<BTreeMap<u64, EpochLog<S>>>,
}

impl<S: AidScheme> Default for TransactionLog<S> {
    fn default() -> Self {
        TransactionLog {
            epochs: Mutex::new(BTreeMap::new()),
        }
    }
}

impl<S: AidScheme> TransactionLog<S> {
    pub fn new() -> Self {
        Self::default()
    }

    /// The caller must have verified `showup` already.
    pub fn insert(
        &self,
        epoch: u64,
        showup: S::Showup,
        bl_hash: [u8; BL_HASH_LEN],
    ) -> InsertOutcome {
        let tag = S::showup_tag_bytes(&showup);
        let mut epochs = self.epochs.lock();
        let log = epochs.entry(epoch).or_default();
        if !log.tags.insert(tag) {
            return InsertOutcome::Duplicate;
        }
        log.records.push(LogRecord { showup, bl_hash });
        InsertOutcome::Accepted
    }

    pub fn contains_tag(&self, epoch: u64, tag: &[u8]) -> bool {
        self.epochs
            .lock()
            .get(&epoch)
            .is_some_and(|log| log.tags.contains(tag))
    }

    pub fn len(&self, epoch: u64) -> usize {
        self.epochs
            .lock()
            .get(&epoch)
            .map_or(0, |log| log.records.len())
    }

    pub fn is_empty(&self) -> bool {
        self.epochs
            .lock()
            .values()
            .all(|log| log.records.is_empty())
    }

    pub fn epochs(&self) -> Vec<u64> {
        self.epochs.lock().keys().copied().collect()
    }

    /// Snapshot of one epoch's records in insertion order.
    pub fn records(&self, epoch: u64) -> Vec<LogRecord<S>> {
        self.epochs
            .lock()
            .get(&epoch)
            .map_or_else(Vec::new, |log| log.records.clone())
    }

    pub fn tags(&self, epoch: u64) -> BTreeSet<Vec<u8>> {
        self.epochs
            .lock()
            .get(&epoch)
            .map_or_else(BTreeSet::new, |log| log.tags.iter().cloned().collect())
    }

    /// One epoch's records ordered by tag, independent of arrival order.
    pub fn sorted_records(&self, epoch: u64) -> Vec<LogRecord<S>> {
        let mut records = self.records(epoch);
        records.sort_by_cached_key(|r| S::showup_tag_bytes(&r.showup));
        records
    }

    /// Sums entitlements and commitment randomness over a consistent
    /// snapshot of the epoch, entries ordered by tag. An epoch with no
    /// records gives `(0, empty)`.
    pub fn gen_audit(&self, epoch: u64) -> Result<(u64, AuditProof<S>), AuditError> {
        gen_audit_from_records::<S>(epoch, &self.sorted_records(epoch))
    }
}

pub(crate) fn gen_audit_from_records<S: AidScheme>(
    epoch: u64,
    records: &[LogRecord<S>],
) -> Result<(u64, AuditProof<S>), AuditError> {
    let bl_hash = records.first().map(|r| r.bl_hash);
    if records.iter().any(|r| Some(r.bl_hash) != bl_hash) {
        return Err(AuditError::MixedBlocklist(epoch));
    }
    let mut ent_sum = 0u64;
    let mut r_sum = Scalar::from(0u64);
    let mut entries = Vec::with_capacity(records.len());
    for rec in records {
        ent_sum = ent_sum
            .checked_add(u64::from(S::showup_ent(&rec.showup)))
            .ok_or(AuditError::Overflow)?;
        r_sum += S::showup_randomness(&rec.showup);
        entries.push(S::audit_entry(&rec.showup));
    }
    let proof = AuditProof {
        r_sum,
        entries,
        bl_hash: if S::AUDIT_BINDS_BL_HASH {
            bl_hash
        } else {
            None
        },
    };
    Ok((ent_sum, proof))
}

impl<S: AidScheme> Wire for TransactionLog<S> {
    fn encode(&self, enc: &mut Encoder) {
        let epochs = self.epochs.lock();
        enc.field(S::NAME.as_bytes());
        enc.u32(epochs.len() as u32);
        for (&epoch, log) in epochs.iter() {
            let mut records: Vec<_> = log.records.iter().collect();
            records.sort_by_cached_key(|r| S::showup_tag_bytes(&r.showup));
            enc.u64(epoch).u32(records.len() as u32);
            for rec in records {
                enc.field(&rec.showup.to_bytes()).field(&rec.bl_hash);
            }
        }
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        if dec.field()? != S::NAME.as_bytes() {
            return Err(DecodeError::Invalid("token system"));
        }
        let log = TransactionLog::new();
        for _ in 0..dec.u32()? {
            let epoch = dec.u64()?;
            let count = dec.u32()?;
            log.epochs.lock().entry(epoch).or_default();
            for _ in 0..count {
                let showup = S::Showup::from_bytes(dec.field()?)?;
                let bl_hash = dec.fixed()?;
                if log.insert(epoch, showup, bl_hash) == InsertOutcome::Duplicate {
                    return Err(DecodeError::Invalid("duplicate tag in log"));
                }
            }
        }
        Ok(log)
    }
}

/// Result of merging tag sets collected offline by several stations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MergeReport {
    pub union: BTreeSet<Vec<u8>>,
    /// Tags seen by more than one input set, with how many sets held each.
    pub duplicates: BTreeMap<Vec<u8>, usize>,
}

pub fn merge_tag_sets<'a, I>(sets: I) -> MergeReport
where
    I: IntoIterator<Item = &'a BTreeSet<Vec<u8>>>,
{
    let mut counts: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
    for set in sets {
        for tag in set {
            *counts.entry(tag.clone()).or_default() += 1;
        }
    }
    let union = counts.keys().cloned().collect();
    let duplicates = counts.into_iter().filter(|&(_, n)| n > 1).collect();
    MergeReport { union, duplicates }
}
