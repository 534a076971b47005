//! Distribution station: verifies showups against the epoch's frozen
//! blocklist and records them in the transaction log.

use std::sync::Arc;

use parking_lot::RwLock;
use thiserror::Error;

use super::audit::AuditProof;
use super::log::{AuditError, InsertOutcome, TransactionLog};
use super::{AidScheme, SystemParams};
use crate::blocklist::{Blocklist, BL_HASH_LEN};

/// Station-side outcome of one showup.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Receipt {
    Accepted,
    Duplicate,
    Invalid,
    EpochClosed,
}

impl Receipt {
    /// What the recipient is told. Duplicates and failures look the same.
    pub fn reply(self) -> RecipientReply {
        match self {
            Receipt::Accepted => RecipientReply::Granted,
            _ => RecipientReply::Refused,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecipientReply {
    Granted,
    Refused,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StationError {
    #[error("epoch {requested} is not after the current epoch {current}")]
    EpochNotAfter { requested: u64, current: u64 },
}

#[derive(Debug)]
struct OpenEpoch<E: crate::blocklist::BlocklistEntry> {
    epoch: u64,
    blocklist: Arc<Blocklist<E>>,
    bl_hash: [u8; BL_HASH_LEN],
}

#[derive(Debug)]
pub struct DistributionStation<S: AidScheme> {
    params: Arc<SystemParams>,
    pk: S::PublicKey,
    log: Arc<TransactionLog<S>>,
    current: RwLock<Option<OpenEpoch<S::Revocation>>>,
}

impl<S: AidScheme> DistributionStation<S> {
    pub fn new(params: Arc<SystemParams>, pk: S::PublicKey) -> Self {
        Self::with_log(params, pk, Arc::new(TransactionLog::new()))
    }

    pub fn with_log(
        params: Arc<SystemParams>,
        pk: S::PublicKey,
        log: Arc<TransactionLog<S>>,
    ) -> Self {
        DistributionStation {
            params,
            pk,
            log,
            current: RwLock::new(None),
        }
    }

    /// Starts a distribution round. The blocklist is fixed until the next
    /// call; later revocations apply from the next epoch on.
    pub fn open_epoch(&self, epoch: u64, bl: Blocklist<S::Revocation>) -> Result<(), StationError> {
        let mut current = self.current.write();
        if let Some(open) = current.as_ref() {
            if epoch <= open.epoch {
                return Err(StationError::EpochNotAfter {
                    requested: epoch,
                    current: open.epoch,
                });
            }
        }
        let bl_hash = bl.digest();
        *current = Some(OpenEpoch {
            epoch,
            blocklist: Arc::new(bl),
            bl_hash,
        });
        Ok(())
    }

    pub fn epoch(&self) -> Option<u64> {
        self.current.read().as_ref().map(|open| open.epoch)
    }

    pub fn blocklist(&self) -> Option<Arc<Blocklist<S::Revocation>>> {
        self.current
            .read()
            .as_ref()
            .map(|open| Arc::clone(&open.blocklist))
    }

    pub fn public_key(&self) -> &S::PublicKey {
        &self.pk
    }

    pub fn log(&self) -> &Arc<TransactionLog<S>> {
        &self.log
    }

    /// Verifies the showup for the open epoch and inserts it if its tag is
    /// new. Safe to call from many workers at once.
    pub fn receive(&self, showup: S::Showup) -> Receipt {
        let (epoch, bl, bl_hash) = match self.current.read().as_ref() {
            Some(open) => (open.epoch, Arc::clone(&open.blocklist), open.bl_hash),
            None => return Receipt::EpochClosed,
        };
        // Cheap pre-check so a replayed tag does not cost a proof check.
        if self.log.contains_tag(epoch, &S::showup_tag_bytes(&showup)) {
            return Receipt::Duplicate;
        }
        if !S::verify_ent(&self.params, &self.pk, epoch, &showup, &bl) {
            return Receipt::Invalid;
        }
        match self.log.insert(epoch, showup, bl_hash) {
            InsertOutcome::Accepted => Receipt::Accepted,
            InsertOutcome::Duplicate => Receipt::Duplicate,
        }
    }

    pub fn gen_audit(&self, epoch: u64) -> Result<(u64, AuditProof<S>), AuditError> {
        self.log.gen_audit(epoch)
    }
}
