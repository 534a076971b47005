//! Audit proofs and the auditor's check.

use std::collections::HashSet;

use blstrs::{G1Projective, Scalar};
use rayon::prelude::*;
use thiserror::Error;

use super::{AidScheme, SystemParams};
use crate::blocklist::{Blocklist, BL_HASH_LEN};
use crate::crypto::encoding::{DecodeError, Decoder, Encoder, Wire};
use crate::crypto::pedersen::Commitment;

/// Per-record material plus the summed commitment randomness. The card
/// variant also names the blocklist digest its records were signed under.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditProof<S: AidScheme> {
    pub r_sum: Scalar,
    pub entries: Vec<S::AuditEntry>,
    pub bl_hash: Option<[u8; BL_HASH_LEN]>,
}

impl<S: AidScheme> AuditProof<S> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum AuditReject {
    #[error("blocklist digest does not match the epoch's blocklist")]
    BlocklistHash,
    #[error("record {0} does not verify")]
    Entry(usize),
    #[error("record {0} repeats an earlier tag")]
    DuplicateTag(usize),
    #[error("commitments do not open to the claimed sum")]
    Sum,
}

pub fn auditor_verify<S: AidScheme>(
    params: &SystemParams,
    pk: &S::PublicKey,
    epoch: u64,
    ent_sum: u64,
    proof: &AuditProof<S>,
    bl: &Blocklist<S::Revocation>,
) -> Result<(), AuditReject> {
    let bl_hash = bl.digest();
    match proof.bl_hash {
        Some(h) if h != bl_hash => return Err(AuditReject::BlocklistHash),
        None if S::AUDIT_BINDS_BL_HASH && !proof.entries.is_empty() => {
            return Err(AuditReject::BlocklistHash)
        }
        _ => {}
    }

    let mut seen = HashSet::with_capacity(proof.entries.len());
    for (i, e) in proof.entries.iter().enumerate() {
        if !seen.insert(S::entry_tag_bytes(e)) {
            return Err(AuditReject::DuplicateTag(i));
        }
    }

    let verdicts: Vec<bool> = proof
        .entries
        .par_iter()
        .map(|e| S::verify_audit_entry(params, pk, epoch, e, bl, &bl_hash))
        .collect();
    if let Some(i) = verdicts.iter().position(|ok| !ok) {
        return Err(AuditReject::Entry(i));
    }

    let commitments: Vec<Commitment> = proof
        .entries
        .iter()
        .map(|e| Commitment(G1Projective::from(S::entry_commitment(e))))
        .collect();
    let product = params.pedersen.combine(&commitments);
    if !params
        .pedersen
        .verify_opening(&product, &Scalar::from(ent_sum), &proof.r_sum)
    {
        return Err(AuditReject::Sum);
    }
    Ok(())
}

impl<S: AidScheme> Wire for AuditProof<S> {
    fn encode(&self, enc: &mut Encoder) {
        enc.field(S::NAME.as_bytes()).scalar(&self.r_sum);
        match &self.bl_hash {
            Some(h) => enc.field(h),
            None => enc.field(&[]),
        };
        enc.u32(self.entries.len() as u32);
        for e in &self.entries {
            enc.field(&e.to_bytes());
        }
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        if dec.field()? != S::NAME.as_bytes() {
            return Err(DecodeError::Invalid("token system"));
        }
        let r_sum = dec.scalar()?;
        let bl_hash = match dec.field()? {
            [] => None,
            h => Some(h.try_into().map_err(|_| DecodeError::FieldLength {
                expected: BL_HASH_LEN,
                found: h.len(),
            })?),
        };
        let count = dec.u32()?;
        let entries = (0..count)
            .map(|_| S::AuditEntry::from_bytes(dec.field()?))
            .collect::<Result<_, _>>()?;
        Ok(AuditProof {
            r_sum,
            entries,
            bl_hash,
        })
    }
}
