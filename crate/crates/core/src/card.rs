//! Smart-card tokens. The card is trusted hardware: it holds the shared
//! audit signing key and refuses to answer twice in one epoch or when its
//! revocation value is blocklisted.
//!
//! A [`Card`] exposes no accessors for its secrets. The only way out is
//! [`Card::export_memory`], which the simulator uses to persist card
//! storage between runs.

use blstrs::{G1Affine, G1Projective, Scalar};
use group::Curve;
use rand_core::{CryptoRng, RngCore};
use thiserror::Error;

use crate::blocklist::{blocklist_hash, Blocklist, BlocklistEntry, EntryKind, BL_HASH_LEN};
use crate::crypto::encoding::{DecodeError, Decoder, Encoder, Wire};
use crate::crypto::group::random_scalar;
use crate::crypto::pedersen::{Commitment, PedersenParams};
use crate::crypto::prf::{prf_eval, PrfKey, TAG_LEN};
use crate::crypto::sig::{sig_sign, sig_verify, Signature, SigningKey, VerifyingKey};

pub const REVOCATION_VALUE_LEN: usize = 32;

/// Random 32-byte value identifying a card household on the blocklist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RevocationValue(pub [u8; REVOCATION_VALUE_LEN]);

impl BlocklistEntry for RevocationValue {
    const KIND: EntryKind = EntryKind::CardValue;

    fn entry_bytes(&self) -> Vec<u8> {
        self.0.to_vec()
    }

    fn from_entry_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
        bytes
            .try_into()
            .map(RevocationValue)
            .map_err(|_| DecodeError::FieldLength {
                expected: REVOCATION_VALUE_LEN,
                found: bytes.len(),
            })
    }
}

pub type CardBlocklist = Blocklist<RevocationValue>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CardError {
    #[error("card is not registered")]
    Unregistered,
    #[error("card is already registered")]
    AlreadyRegistered,
    #[error("installed signing key does not match the card's public key")]
    KeyMismatch,
    #[error("owner authentication failed")]
    NotAuthenticated,
    #[error("source card has already been used for distribution")]
    SourceUsed,
    #[error("source and target cards trust different keys")]
    DifferentKeys,
}

/// Why the last showup aborted. Never leaves the card on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbortReason {
    Blocked,
    StaleEpoch,
}

/// When a registered card may be copied onto a fresh one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClonePolicy {
    /// Only before the source card has taken part in any distribution.
    #[default]
    Strict,
    /// At any time.
    Permissive,
}

/// Registration station output installed on the card over the secure
/// registration channel.
#[derive(Clone)]
pub struct CardRegistration {
    sk: SigningKey,
    ent: u32,
    revocation: RevocationValue,
}

impl std::fmt::Debug for CardRegistration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CardRegistration")
            .field("ent", &self.ent)
            .finish_non_exhaustive()
    }
}

impl CardRegistration {
    pub fn entitlement(&self) -> u32 {
        self.ent
    }
}

impl Wire for CardRegistration {
    fn encode(&self, enc: &mut Encoder) {
        enc.field(&self.sk.to_bytes())
            .u32(self.ent)
            .field(&self.revocation.0);
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(CardRegistration {
            sk: SigningKey::from_bytes(&dec.fixed()?)?,
            ent: dec.u32()?,
            revocation: RevocationValue(dec.fixed()?),
        })
    }
}

/// Registration station side: pick a fresh revocation value and hand the
/// shared signing key to the card.
pub fn rs_process_reg_card<R: RngCore + CryptoRng>(
    sk: &SigningKey,
    ent: u32,
    rng: &mut R,
) -> (CardRegistration, RevocationValue) {
    let mut v = [0u8; REVOCATION_VALUE_LEN];
    rng.fill_bytes(&mut v);
    let revocation = RevocationValue(v);
    (
        CardRegistration {
            sk: sk.clone(),
            ent,
            revocation,
        },
        revocation,
    )
}

#[derive(Clone)]
struct CardSecrets {
    sk: SigningKey,
    key: PrfKey,
    ent: u32,
    revocation: RevocationValue,
}

pub struct Card {
    epoch_last: u64,
    pk: VerifyingKey,
    secrets: Option<CardSecrets>,
    last_abort: Option<AbortReason>,
}

impl std::fmt::Debug for Card {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Card")
            .field("epoch_last", &self.epoch_last)
            .field("registered", &self.secrets.is_some())
            .finish()
    }
}

/// Audit proof material: signature over the record plus the opening.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CardEntProof {
    pub sig: Signature,
    pub epoch: u64,
    pub commitment: G1Affine,
    pub r: Scalar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CardResponse {
    pub ent: u32,
    pub tag: [u8; TAG_LEN],
    pub proof: CardEntProof,
}

impl Wire for CardResponse {
    fn encode(&self, enc: &mut Encoder) {
        enc.u32(self.ent)
            .field(&self.tag)
            .field(&self.proof.sig.to_bytes())
            .u64(self.proof.epoch)
            .g1(&self.proof.commitment)
            .scalar(&self.proof.r);
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(CardResponse {
            ent: dec.u32()?,
            tag: dec.fixed()?,
            proof: CardEntProof {
                sig: Signature::from_bytes(&dec.fixed()?)?,
                epoch: dec.u64()?,
                commitment: dec.g1()?,
                r: dec.scalar()?,
            },
        })
    }
}

/// The signed audit statement `tau || eps || Com || h_BL`.
pub fn audit_message(
    tag: &[u8; TAG_LEN],
    epoch: u64,
    commitment: &G1Affine,
    bl_hash: &[u8; BL_HASH_LEN],
) -> Vec<u8> {
    let mut enc = Encoder::new();
    enc.field(tag).u64(epoch).g1(commitment).field(bl_hash);
    enc.finish()
}

pub fn card_setup(pk: VerifyingKey) -> Card {
    Card {
        epoch_last: 0,
        pk,
        secrets: None,
        last_abort: None,
    }
}

impl Card {
    pub fn is_registered(&self) -> bool {
        self.secrets.is_some()
    }

    pub fn epoch_last(&self) -> u64 {
        self.epoch_last
    }

    pub fn public_key(&self) -> &VerifyingKey {
        &self.pk
    }

    /// Installs the registration response and draws the household secret.
    /// Returns the entitlement and revocation value the card now holds.
    pub fn finish_reg<R: RngCore + CryptoRng>(
        &mut self,
        reg: CardRegistration,
        rng: &mut R,
    ) -> Result<(u32, RevocationValue), CardError> {
        if self.secrets.is_some() {
            return Err(CardError::AlreadyRegistered);
        }
        if reg.sk.verifying_key() != self.pk {
            return Err(CardError::KeyMismatch);
        }
        self.secrets = Some(CardSecrets {
            sk: reg.sk,
            key: PrfKey::random(rng),
            ent: reg.ent,
            revocation: reg.revocation,
        });
        Ok((reg.ent, reg.revocation))
    }

    /// Copies a registered card's household state onto this fresh card.
    pub fn clone_from(
        &mut self,
        source: &Card,
        owner_authenticated: bool,
        policy: ClonePolicy,
    ) -> Result<(), CardError> {
        if !owner_authenticated {
            return Err(CardError::NotAuthenticated);
        }
        if self.secrets.is_some() {
            return Err(CardError::AlreadyRegistered);
        }
        let secrets = source.secrets.as_ref().ok_or(CardError::Unregistered)?;
        if policy == ClonePolicy::Strict && source.epoch_last != 0 {
            return Err(CardError::SourceUsed);
        }
        if source.pk != self.pk {
            return Err(CardError::DifferentKeys);
        }
        self.secrets = Some(secrets.clone());
        self.epoch_last = self.epoch_last.max(source.epoch_last);
        Ok(())
    }

    /// Answers a distribution request, or returns `Ok(None)` (every output
    /// field empty) if the card is blocked or has already answered in this
    /// or a later epoch.
    pub fn showup<R: RngCore + CryptoRng>(
        &mut self,
        pedersen: &PedersenParams,
        epoch: u64,
        bl: &CardBlocklist,
        rng: &mut R,
    ) -> Result<Option<CardResponse>, CardError> {
        let s = self.secrets.as_ref().ok_or(CardError::Unregistered)?;
        if bl.contains_bytes(&s.revocation.0) {
            self.last_abort = Some(AbortReason::Blocked);
            return Ok(None);
        }
        if epoch <= self.epoch_last {
            self.last_abort = Some(AbortReason::StaleEpoch);
            return Ok(None);
        }
        let tag = prf_eval(&s.key, epoch);
        let r = random_scalar(rng);
        let commitment = pedersen
            .commit(&Scalar::from(u64::from(s.ent)), &r)
            .0
            .to_affine();
        let sig = sig_sign(
            &s.sk,
            &audit_message(&tag, epoch, &commitment, &blocklist_hash(bl)),
        );
        self.epoch_last = epoch;
        self.last_abort = None;
        Ok(Some(CardResponse {
            ent: s.ent,
            tag,
            proof: CardEntProof {
                sig,
                epoch,
                commitment,
                r,
            },
        }))
    }

    /// Reason for the most recent abort; test instrumentation only.
    #[doc(hidden)]
    pub fn last_abort(&self) -> Option<AbortReason> {
        self.last_abort
    }

    /// Serializes the card's non-volatile memory.
    #[doc(hidden)]
    pub fn export_memory(&self) -> Vec<u8> {
        let mut enc = Encoder::new();
        enc.u64(self.epoch_last).field(&self.pk.to_bytes());
        match &self.secrets {
            None => {
                enc.field(&[0]);
            }
            Some(s) => {
                enc.field(&[1])
                    .field(&s.sk.to_bytes())
                    .field(s.key.as_bytes())
                    .u32(s.ent)
                    .field(&s.revocation.0);
            }
        }
        enc.finish()
    }

    #[doc(hidden)]
    pub fn import_memory(bytes: &[u8]) -> Result<Card, DecodeError> {
        let mut dec = Decoder::new(bytes)?;
        let epoch_last = dec.u64()?;
        let pk = VerifyingKey::from_bytes(&dec.fixed()?)?;
        let secrets = match dec.fixed::<1>()? {
            [0] => None,
            [1] => Some(CardSecrets {
                sk: SigningKey::from_bytes(&dec.fixed()?)?,
                key: PrfKey::from_bytes(dec.fixed()?),
                ent: dec.u32()?,
                revocation: RevocationValue(dec.fixed()?),
            }),
            _ => return Err(DecodeError::Invalid("card registration flag")),
        };
        dec.finish()?;
        Ok(Card {
            epoch_last,
            pk,
            secrets,
            last_abort: None,
        })
    }
}

/// Station check of a card response: the signature covers the record under
/// the blocklist in force, and the commitment opens to the entitlement.
/// Tag freshness is the transaction log's job.
pub fn ds_verify_ent_card(
    pk: &VerifyingKey,
    pedersen: &PedersenParams,
    epoch: u64,
    resp: &CardResponse,
    bl: &CardBlocklist,
) -> bool {
    resp.proof.epoch == epoch
        && verify_card_record(
            pk,
            epoch,
            &resp.tag,
            &resp.proof.commitment,
            &resp.proof.sig,
            &blocklist_hash(bl),
        )
        && pedersen.verify_opening(
            &Commitment(G1Projective::from(resp.proof.commitment)),
            &Scalar::from(u64::from(resp.ent)),
            &resp.proof.r,
        )
}

/// Signature check shared by the station and the auditor.
pub fn verify_card_record(
    pk: &VerifyingKey,
    epoch: u64,
    tag: &[u8; TAG_LEN],
    commitment: &G1Affine,
    sig: &Signature,
    bl_hash: &[u8; BL_HASH_LEN],
) -> bool {
    sig_verify(pk, &audit_message(tag, epoch, commitment, bl_hash), sig)
}
