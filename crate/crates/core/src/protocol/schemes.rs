//! The card and phone systems behind the common interface.

use blstrs::{G1Affine, Scalar};
use rand_core::{CryptoRng, RngCore};

use super::{AidScheme, ProtocolError, SystemParams};
use crate::abc::{abc_gen, IssueRequest, IssuerKeyPair, IssuerPublicKey};
use crate::blocklist::{Blocklist, BL_HASH_LEN};
use crate::card::{
    card_setup, ds_verify_ent_card, rs_process_reg_card, verify_card_record, Card,
    CardRegistration, CardResponse, ClonePolicy, RevocationValue,
};
use crate::crypto::encoding::{DecodeError, Decoder, Encoder, Wire};
use crate::crypto::prf::TAG_LEN;
use crate::crypto::sig::{sig_gen, SigKeyPair, Signature, VerifyingKey};
use crate::phone::{
    ds_verify_ent_phone, phone_setup, rs_process_reg_phone, Phone, PhoneRegResponse, PhoneResponse,
};
use crate::showup::{
    verify_showup_proof, RevocationToken, ShowupProof, ShowupStatement, PHONE_ATTRS,
};

/// Cards carry the shared signing key; no initial registration message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CardSystem;

/// Phones hold blindly issued credentials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PhoneSystem;

/// Empty registration request (cards send none).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NoRequest;

impl Wire for NoRequest {
    fn encode(&self, _: &mut Encoder) {}

    fn decode(_: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(NoRequest)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CardAuditEntry {
    pub tag: [u8; TAG_LEN],
    pub commitment: G1Affine,
    pub sig: Signature,
}

impl Wire for CardAuditEntry {
    fn encode(&self, enc: &mut Encoder) {
        enc.field(&self.tag)
            .g1(&self.commitment)
            .field(&self.sig.to_bytes());
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(CardAuditEntry {
            tag: dec.fixed()?,
            commitment: dec.g1()?,
            sig: Signature::from_bytes(&dec.fixed()?)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhoneAuditEntry {
    pub tag: G1Affine,
    pub commitment: G1Affine,
    pub proof: ShowupProof,
}

impl Wire for PhoneAuditEntry {
    fn encode(&self, enc: &mut Encoder) {
        enc.g1(&self.tag)
            .g1(&self.commitment)
            .field(&self.proof.to_bytes());
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(PhoneAuditEntry {
            tag: dec.g1()?,
            commitment: dec.g1()?,
            proof: ShowupProof::from_bytes(dec.field()?)?,
        })
    }
}

impl AidScheme for CardSystem {
    const NAME: &'static str = "card";
    const AUDIT_BINDS_BL_HASH: bool = true;

    type RsKey = SigKeyPair;
    type PublicKey = VerifyingKey;
    type Token = Card;
    type Request = NoRequest;
    type Response = CardRegistration;
    type Revocation = RevocationValue;
    type Showup = CardResponse;
    type AuditEntry = CardAuditEntry;

    fn setup_rs<R: RngCore + CryptoRng>(rng: &mut R) -> SigKeyPair {
        sig_gen(rng)
    }

    fn public_key(rs: &SigKeyPair) -> VerifyingKey {
        rs.pk
    }

    fn setup_token(pk: &VerifyingKey) -> Card {
        card_setup(*pk)
    }

    fn prepare_reg<R: RngCore + CryptoRng>(
        _: &mut Card,
        _: &mut R,
    ) -> Result<NoRequest, ProtocolError> {
        Ok(NoRequest)
    }

    fn process_reg<R: RngCore + CryptoRng>(
        rs: &SigKeyPair,
        ent: u32,
        _: &NoRequest,
        rng: &mut R,
    ) -> Result<(CardRegistration, RevocationValue), ProtocolError> {
        Ok(rs_process_reg_card(&rs.sk, ent, rng))
    }

    fn finish_reg<R: RngCore + CryptoRng>(
        card: &mut Card,
        resp: &CardRegistration,
        rng: &mut R,
    ) -> Result<(u32, RevocationValue), ProtocolError> {
        Ok(card.finish_reg(resp.clone(), rng)?)
    }

    fn copy_token(pk: &VerifyingKey, source: &Card) -> Result<Card, ProtocolError> {
        let mut card = card_setup(*pk);
        card.clone_from(source, true, ClonePolicy::Strict)?;
        Ok(card)
    }

    fn showup<R: RngCore + CryptoRng>(
        params: &SystemParams,
        card: &mut Card,
        epoch: u64,
        bl: &Blocklist<RevocationValue>,
        rng: &mut R,
    ) -> Result<Option<CardResponse>, ProtocolError> {
        Ok(card.showup(&params.pedersen, epoch, bl, rng)?)
    }

    fn verify_ent(
        params: &SystemParams,
        pk: &VerifyingKey,
        epoch: u64,
        s: &CardResponse,
        bl: &Blocklist<RevocationValue>,
    ) -> bool {
        ds_verify_ent_card(pk, &params.pedersen, epoch, s, bl)
    }

    fn token_epoch_last(card: &Card) -> u64 {
        card.epoch_last()
    }

    fn export_token(card: &Card) -> Vec<u8> {
        card.export_memory()
    }

    fn import_token(bytes: &[u8]) -> Result<Card, DecodeError> {
        Card::import_memory(bytes)
    }

    fn showup_ent(s: &CardResponse) -> u32 {
        s.ent
    }

    fn showup_tag_bytes(s: &CardResponse) -> Vec<u8> {
        s.tag.to_vec()
    }

    fn showup_commitment(s: &CardResponse) -> G1Affine {
        s.proof.commitment
    }

    fn showup_randomness(s: &CardResponse) -> Scalar {
        s.proof.r
    }

    fn audit_entry(s: &CardResponse) -> CardAuditEntry {
        CardAuditEntry {
            tag: s.tag,
            commitment: s.proof.commitment,
            sig: s.proof.sig,
        }
    }

    fn entry_tag_bytes(e: &CardAuditEntry) -> Vec<u8> {
        e.tag.to_vec()
    }

    fn entry_commitment(e: &CardAuditEntry) -> G1Affine {
        e.commitment
    }

    fn verify_audit_entry(
        _: &SystemParams,
        pk: &VerifyingKey,
        epoch: u64,
        e: &CardAuditEntry,
        _: &Blocklist<RevocationValue>,
        bl_hash: &[u8; BL_HASH_LEN],
    ) -> bool {
        verify_card_record(pk, epoch, &e.tag, &e.commitment, &e.sig, bl_hash)
    }
}

impl AidScheme for PhoneSystem {
    const NAME: &'static str = "phone";
    const AUDIT_BINDS_BL_HASH: bool = false;

    type RsKey = IssuerKeyPair;
    type PublicKey = IssuerPublicKey;
    type Token = Phone;
    type Request = IssueRequest;
    type Response = PhoneRegResponse;
    type Revocation = RevocationToken;
    type Showup = PhoneResponse;
    type AuditEntry = PhoneAuditEntry;

    fn setup_rs<R: RngCore + CryptoRng>(rng: &mut R) -> IssuerKeyPair {
        abc_gen(PHONE_ATTRS, rng).expect("three attributes")
    }

    fn public_key(rs: &IssuerKeyPair) -> IssuerPublicKey {
        rs.pk.clone()
    }

    fn setup_token(pk: &IssuerPublicKey) -> Phone {
        phone_setup(pk.clone())
    }

    fn prepare_reg<R: RngCore + CryptoRng>(
        phone: &mut Phone,
        rng: &mut R,
    ) -> Result<IssueRequest, ProtocolError> {
        Ok(phone.prepare_reg(rng)?)
    }

    fn process_reg<R: RngCore + CryptoRng>(
        rs: &IssuerKeyPair,
        ent: u32,
        req: &IssueRequest,
        rng: &mut R,
    ) -> Result<(PhoneRegResponse, RevocationToken), ProtocolError> {
        Ok(rs_process_reg_phone(rs, ent, req, rng)?)
    }

    fn finish_reg<R: RngCore + CryptoRng>(
        phone: &mut Phone,
        resp: &PhoneRegResponse,
        _: &mut R,
    ) -> Result<(u32, RevocationToken), ProtocolError> {
        Ok(phone.finish_reg(resp)?)
    }

    fn copy_token(_: &IssuerPublicKey, source: &Phone) -> Result<Phone, ProtocolError> {
        if !source.is_registered() {
            return Err(crate::phone::PhoneError::Unregistered.into());
        }
        Ok(source.clone())
    }

    fn showup<R: RngCore + CryptoRng>(
        params: &SystemParams,
        phone: &mut Phone,
        epoch: u64,
        bl: &Blocklist<RevocationToken>,
        rng: &mut R,
    ) -> Result<Option<PhoneResponse>, ProtocolError> {
        Ok(phone.showup(&params.pedersen, epoch, bl, rng)?)
    }

    fn verify_ent(
        params: &SystemParams,
        pk: &IssuerPublicKey,
        epoch: u64,
        s: &PhoneResponse,
        bl: &Blocklist<RevocationToken>,
    ) -> bool {
        ds_verify_ent_phone(pk, &params.pedersen, epoch, s, bl).is_ok()
    }

    fn token_epoch_last(phone: &Phone) -> u64 {
        phone.epoch_last()
    }

    fn export_token(phone: &Phone) -> Vec<u8> {
        phone.export_memory()
    }

    fn import_token(bytes: &[u8]) -> Result<Phone, DecodeError> {
        Phone::import_memory(bytes)
    }

    fn showup_ent(s: &PhoneResponse) -> u32 {
        s.ent
    }

    fn showup_tag_bytes(s: &PhoneResponse) -> Vec<u8> {
        s.tag.to_compressed().to_vec()
    }

    fn showup_commitment(s: &PhoneResponse) -> G1Affine {
        s.proof.commitment
    }

    fn showup_randomness(s: &PhoneResponse) -> Scalar {
        s.proof.r
    }

    fn audit_entry(s: &PhoneResponse) -> PhoneAuditEntry {
        PhoneAuditEntry {
            tag: s.tag,
            commitment: s.proof.commitment,
            proof: s.proof.proof.clone(),
        }
    }

    fn entry_tag_bytes(e: &PhoneAuditEntry) -> Vec<u8> {
        e.tag.to_compressed().to_vec()
    }

    fn entry_commitment(e: &PhoneAuditEntry) -> G1Affine {
        e.commitment
    }

    fn verify_audit_entry(
        params: &SystemParams,
        pk: &IssuerPublicKey,
        epoch: u64,
        e: &PhoneAuditEntry,
        bl: &Blocklist<RevocationToken>,
        _: &[u8; BL_HASH_LEN],
    ) -> bool {
        let stmt = ShowupStatement {
            pk,
            pedersen: &params.pedersen,
            epoch,
            tag: e.tag,
            commitment: e.commitment,
            blocklist: bl,
        };
        verify_showup_proof(&stmt, &e.proof).is_ok()
    }
}
