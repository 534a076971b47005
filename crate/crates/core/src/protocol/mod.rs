//! The four-phase interface shared by both token systems, plus the
//! distribution station's transaction log and the audit.

mod audit;
mod log;
mod schemes;
mod station;

use std::fmt::Debug;

use blstrs::{G1Affine, Scalar};
use rand_core::{CryptoRng, RngCore};
use thiserror::Error;

use crate::abc::AbcError;
use crate::blocklist::{Blocklist, BlocklistEntry, BL_HASH_LEN};
use crate::card::CardError;
use crate::crypto::encoding::Wire;
use crate::crypto::pedersen::{pc_gen, PedersenParams};
use crate::phone::PhoneError;

pub use audit::{auditor_verify, AuditProof, AuditReject};
pub(crate) use log::gen_audit_from_records;
pub use log::{merge_tag_sets, AuditError, InsertOutcome, LogRecord, MergeReport, TransactionLog};
pub use schemes::{CardAuditEntry, CardSystem, NoRequest, PhoneAuditEntry, PhoneSystem};
pub use station::{DistributionStation, Receipt, RecipientReply, StationError};

/// Seed for the commitment parameters used unless a caller picks another.
pub const DEFAULT_PARAMS_SEED: &[u8] = b"aidkit-params-v1";

/// Public parameters every party shares.
#[derive(Debug, Clone)]
pub struct SystemParams {
    pub pedersen: PedersenParams,
}

impl SystemParams {
    pub fn new(seed: &[u8]) -> Self {
        SystemParams {
            pedersen: pc_gen(128, seed).expect("128-bit parameters are supported"),
        }
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams::new(DEFAULT_PARAMS_SEED)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error(transparent)]
    Card(#[from] CardError),
    #[error(transparent)]
    Phone(#[from] PhoneError),
    #[error(transparent)]
    Credential(#[from] AbcError),
}

/// A token system: setup, registration, distribution and the checks the
/// station and auditor run.
pub trait AidScheme:
    Sized + Copy + Debug + Default + PartialEq + Eq + Send + Sync + 'static
{
    const NAME: &'static str;
    /// Whether audit proofs carry the blocklist digest the records were
    /// signed under.
    const AUDIT_BINDS_BL_HASH: bool;

    /// Registration station secret.
    type RsKey: Wire + Send + Sync;
    type PublicKey: Wire + Clone + Debug + Send + Sync;
    type Token: Send;
    type Request: Wire + Clone + Debug + Send + Sync;
    type Response: Wire + Clone + Debug + Send + Sync;
    type Revocation: BlocklistEntry + Send + Sync;
    /// Token output at distribution: entitlement, tag and proof.
    type Showup: Wire + Clone + Debug + PartialEq + Send + Sync;
    type AuditEntry: Wire + Clone + Debug + PartialEq + Send + Sync;

    fn setup_rs<R: RngCore + CryptoRng>(rng: &mut R) -> Self::RsKey;
    fn public_key(rs: &Self::RsKey) -> Self::PublicKey;
    fn setup_token(pk: &Self::PublicKey) -> Self::Token;
    fn prepare_reg<R: RngCore + CryptoRng>(
        token: &mut Self::Token,
        rng: &mut R,
    ) -> Result<Self::Request, ProtocolError>;
    fn process_reg<R: RngCore + CryptoRng>(
        rs: &Self::RsKey,
        ent: u32,
        req: &Self::Request,
        rng: &mut R,
    ) -> Result<(Self::Response, Self::Revocation), ProtocolError>;
    /// Returns the entitlement and revocation value the token learned.
    fn finish_reg<R: RngCore + CryptoRng>(
        token: &mut Self::Token,
        resp: &Self::Response,
        rng: &mut R,
    ) -> Result<(u32, Self::Revocation), ProtocolError>;
    /// Copies a registered token onto a fresh one (card-whispering for
    /// cards, copying storage for phones).
    fn copy_token(pk: &Self::PublicKey, source: &Self::Token)
        -> Result<Self::Token, ProtocolError>;

    /// `Ok(None)` is the all-empty abort output.
    fn showup<R: RngCore + CryptoRng>(
        params: &SystemParams,
        token: &mut Self::Token,
        epoch: u64,
        bl: &Blocklist<Self::Revocation>,
        rng: &mut R,
    ) -> Result<Option<Self::Showup>, ProtocolError>;
    fn verify_ent(
        params: &SystemParams,
        pk: &Self::PublicKey,
        epoch: u64,
        showup: &Self::Showup,
        bl: &Blocklist<Self::Revocation>,
    ) -> bool;

    fn token_epoch_last(token: &Self::Token) -> u64;
    fn export_token(token: &Self::Token) -> Vec<u8>;
    fn import_token(bytes: &[u8]) -> Result<Self::Token, crate::crypto::encoding::DecodeError>;

    fn showup_ent(s: &Self::Showup) -> u32;
    fn showup_tag_bytes(s: &Self::Showup) -> Vec<u8>;
    fn showup_commitment(s: &Self::Showup) -> G1Affine;
    fn showup_randomness(s: &Self::Showup) -> Scalar;

    fn audit_entry(s: &Self::Showup) -> Self::AuditEntry;
    fn entry_tag_bytes(e: &Self::AuditEntry) -> Vec<u8>;
    fn entry_commitment(e: &Self::AuditEntry) -> G1Affine;
    /// Verifies one audit record. `bl_hash` is the digest of `bl`.
    fn verify_audit_entry(
        params: &SystemParams,
        pk: &Self::PublicKey,
        epoch: u64,
        e: &Self::AuditEntry,
        bl: &Blocklist<Self::Revocation>,
        bl_hash: &[u8; BL_HASH_LEN],
    ) -> bool;
}
