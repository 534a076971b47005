//! Smartphone tokens. The phone is untrusted; every property comes from the
//! credential it holds and the showup proof.

use std::collections::BTreeMap;

use blstrs::{G1Affine, Scalar};
use ff::PrimeField;
use group::{Curve, Group};
use rand_core::{CryptoRng, RngCore};
use thiserror::Error;

use crate::abc::{
    abc_issue_request, abc_issue_sign, abc_issue_unblind, AbcError, BlindSignature, Credential,
    IssuanceState, IssueRequest, IssuerKeyPair, IssuerPublicKey,
};
use crate::crypto::encoding::{DecodeError, Decoder, Encoder, Packer, Wire, G1_LEN};
use crate::crypto::group::random_scalar;
use crate::crypto::pedersen::PedersenParams;
use crate::showup::{
    find_revoking_entry, prove_showup, verify_showup, PhoneBlocklist, RevocationToken, ShowupProof,
    ShowupReject, ShowupStatement, ATTR_ENT, ATTR_KEY, ATTR_REV,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PhoneError {
    #[error("phone is not registered")]
    Unregistered,
    #[error("phone is already registered")]
    AlreadyRegistered,
    #[error("no registration in progress")]
    NotPrepared,
    #[error("entitlement does not fit in 32 bits")]
    Entitlement,
    #[error(transparent)]
    Credential(#[from] AbcError),
}

/// Issuer's reply: blinded signature plus the issuer-chosen attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhoneRegResponse {
    pub sig: BlindSignature,
    pub ent: Scalar,
    pub rev: Scalar,
}

impl PhoneRegResponse {
    fn issuer_attrs(&self) -> BTreeMap<usize, Scalar> {
        BTreeMap::from([(ATTR_ENT, self.ent), (ATTR_REV, self.rev)])
    }
}

impl Wire for PhoneRegResponse {
    fn encode(&self, enc: &mut Encoder) {
        enc.field(&Packer::new().g1(&self.sig.s1).g1(&self.sig.s2).into_inner())
            .scalar(&self.ent)
            .scalar(&self.rev);
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let mut r = dec.reader(2 * G1_LEN)?;
        let sig = BlindSignature {
            s1: r.g1()?,
            s2: r.g1()?,
        };
        Ok(PhoneRegResponse {
            sig,
            ent: dec.scalar()?,
            rev: dec.scalar()?,
        })
    }
}

/// Registration station: signs the request over a fresh `r_H` and the
/// household's entitlement. The hidden household key never reaches here.
pub fn rs_process_reg_phone<R: RngCore + CryptoRng>(
    kp: &IssuerKeyPair,
    ent: u32,
    req: &IssueRequest,
    rng: &mut R,
) -> Result<(PhoneRegResponse, RevocationToken), AbcError> {
    let rev = random_scalar(rng);
    let ent = Scalar::from(u64::from(ent));
    let attrs = BTreeMap::from([(ATTR_ENT, ent), (ATTR_REV, rev)]);
    let sig = abc_issue_sign(&kp.sk, &kp.pk, &attrs, req, rng)?;
    Ok((
        PhoneRegResponse { sig, ent, rev },
        RevocationToken::for_secret(&rev),
    ))
}

#[derive(Clone)]
enum Stage {
    Fresh,
    Pending(IssuanceState),
    Registered(Credential),
}

/// Phone token state. `Clone` models copying the phone's storage.
#[derive(Clone)]
pub struct Phone {
    epoch_last: u64,
    pk: IssuerPublicKey,
    stage: Stage,
}

impl std::fmt::Debug for Phone {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let stage = match self.stage {
            Stage::Fresh => "fresh",
            Stage::Pending(_) => "pending",
            Stage::Registered(_) => "registered",
        };
        f.debug_struct("Phone")
            .field("epoch_last", &self.epoch_last)
            .field("stage", &stage)
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhoneEntProof {
    pub proof: ShowupProof,
    pub commitment: G1Affine,
    pub r: Scalar,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhoneResponse {
    pub ent: u32,
    pub tag: G1Affine,
    pub proof: PhoneEntProof,
}

impl Wire for PhoneResponse {
    fn encode(&self, enc: &mut Encoder) {
        enc.u32(self.ent)
            .g1(&self.tag)
            .g1(&self.proof.commitment)
            .scalar(&self.proof.r)
            .field(&self.proof.proof.to_bytes());
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let ent = dec.u32()?;
        let tag = dec.g1()?;
        let commitment = dec.g1()?;
        let r = dec.scalar()?;
        let proof = ShowupProof::from_bytes(dec.field()?)?;
        Ok(PhoneResponse {
            ent,
            tag,
            proof: PhoneEntProof {
                proof,
                commitment,
                r,
            },
        })
    }
}

pub fn phone_setup(pk: IssuerPublicKey) -> Phone {
    Phone {
        epoch_last: 0,
        pk,
        stage: Stage::Fresh,
    }
}

fn scalar_to_u32(s: &Scalar) -> Option<u32> {
    let bytes = s.to_repr();
    let bytes = bytes.as_ref();
    // Little-endian representation.
    if bytes[4..].iter().any(|&b| b != 0) {
        return None;
    }
    Some(u32::from_le_bytes(bytes[..4].try_into().unwrap()))
}

impl Phone {
    pub fn epoch_last(&self) -> u64 {
        self.epoch_last
    }

    pub(crate) fn credential(&self) -> Option<&Credential> {
        match &self.stage {
            Stage::Registered(cred) => Some(cred),
            _ => None,
        }
    }

    pub fn is_registered(&self) -> bool {
        matches!(self.stage, Stage::Registered(_))
    }

    pub fn public_key(&self) -> &IssuerPublicKey {
        &self.pk
    }

    /// Draws the household key and builds the blind issuance request.
    pub fn prepare_reg<R: RngCore + CryptoRng>(
        &mut self,
        rng: &mut R,
    ) -> Result<IssueRequest, PhoneError> {
        if self.is_registered() {
            return Err(PhoneError::AlreadyRegistered);
        }
        let key = random_scalar(rng);
        let (req, st) = abc_issue_request(&self.pk, &BTreeMap::from([(ATTR_KEY, key)]), rng)?;
        self.stage = Stage::Pending(st);
        Ok(req)
    }

    /// Unblinds and checks the credential. Returns the entitlement and the
    /// revocation token the registration station recorded.
    pub fn finish_reg(
        &mut self,
        resp: &PhoneRegResponse,
    ) -> Result<(u32, RevocationToken), PhoneError> {
        let st = match &self.stage {
            Stage::Pending(st) => st,
            Stage::Registered(_) => return Err(PhoneError::AlreadyRegistered),
            Stage::Fresh => return Err(PhoneError::NotPrepared),
        };
        let ent = scalar_to_u32(&resp.ent).ok_or(PhoneError::Entitlement)?;
        let cred = abc_issue_unblind(&self.pk, st, &resp.issuer_attrs(), &resp.sig)?;
        self.stage = Stage::Registered(cred);
        Ok((ent, RevocationToken::for_secret(&resp.rev)))
    }

    /// Answers a distribution request, or `Ok(None)` if the phone is
    /// blocklisted or already answered in this or a later epoch.
    pub fn showup<R: RngCore + CryptoRng>(
        &mut self,
        pedersen: &PedersenParams,
        epoch: u64,
        bl: &PhoneBlocklist,
        rng: &mut R,
    ) -> Result<Option<PhoneResponse>, PhoneError> {
        let Stage::Registered(cred) = &self.stage else {
            return Err(PhoneError::Unregistered);
        };
        if epoch <= self.epoch_last
            || find_revoking_entry(pedersen, bl, &cred.attrs()[ATTR_REV]).is_some()
        {
            return Ok(None);
        }
        let ent = scalar_to_u32(&cred.attrs()[ATTR_ENT]).ok_or(PhoneError::Entitlement)?;
        let r = random_scalar(rng);
        let (tag, commitment, proof) =
            match prove_showup(&self.pk, pedersen, cred, epoch, bl, &r, rng) {
                Ok(out) => out,
                Err(_) => return Ok(None),
            };
        self.epoch_last = epoch;
        Ok(Some(PhoneResponse {
            ent,
            tag,
            proof: PhoneEntProof {
                proof,
                commitment,
                r,
            },
        }))
    }

    /// Serializes the phone's storage for the simulator.
    #[doc(hidden)]
    pub fn export_memory(&self) -> Vec<u8> {
        let mut enc = Encoder::new();
        enc.u64(self.epoch_last).field(&self.pk.to_bytes());
        match &self.stage {
            Stage::Registered(cred) => {
                enc.field(&[1]).field(&cred.to_bytes());
            }
            _ => {
                enc.field(&[0]);
            }
        }
        enc.finish()
    }

    #[doc(hidden)]
    pub fn import_memory(bytes: &[u8]) -> Result<Phone, DecodeError> {
        let mut dec = Decoder::new(bytes)?;
        let epoch_last = dec.u64()?;
        let pk = IssuerPublicKey::from_bytes(dec.field()?)?;
        let stage = match dec.fixed::<1>()? {
            [0] => Stage::Fresh,
            [1] => Stage::Registered(Credential::from_bytes(dec.field()?)?),
            _ => return Err(DecodeError::Invalid("phone stage")),
        };
        dec.finish()?;
        Ok(Phone {
            epoch_last,
            pk,
            stage,
        })
    }
}

/// Station check of a phone response.
pub fn ds_verify_ent_phone(
    pk: &IssuerPublicKey,
    pedersen: &PedersenParams,
    epoch: u64,
    resp: &PhoneResponse,
    bl: &PhoneBlocklist,
) -> Result<(), ShowupReject> {
    let stmt = ShowupStatement {
        pk,
        pedersen,
        epoch,
        tag: resp.tag,
        commitment: resp.proof.commitment,
        blocklist: bl,
    };
    verify_showup(
        &stmt,
        &Scalar::from(u64::from(resp.ent)),
        &resp.proof.r,
        &resp.proof.proof,
    )
}

/// Checks that `token` is `(g, g^{r_H})` for the given secret.
pub fn revocation_token_is_well_formed(token: &RevocationToken, rev: &Scalar) -> bool {
    token.base == blstrs::G1Projective::generator().to_affine() && token.matches(rev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abc::abc_gen;
    use crate::crypto::pedersen::pc_gen;
    use crate::showup::PHONE_ATTRS;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    struct Fixture {
        kp: IssuerKeyPair,
        pc: PedersenParams,
        rng: ChaCha20Rng,
    }

    fn fixture(seed: u64) -> Fixture {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        Fixture {
            kp: abc_gen(PHONE_ATTRS, &mut rng).unwrap(),
            pc: pc_gen(128, b"test-v1").unwrap(),
            rng,
        }
    }

    impl Fixture {
        fn registered(&mut self, ent: u32) -> (Phone, RevocationToken) {
            let mut phone = phone_setup(self.kp.pk.clone());
            let req = phone.prepare_reg(&mut self.rng).unwrap();
            let (resp, token) = rs_process_reg_phone(&self.kp, ent, &req, &mut self.rng).unwrap();
            let (got, t2) = phone.finish_reg(&resp).unwrap();
            assert_eq!((got, t2), (ent, token));
            (phone, token)
        }
    }

    #[test]
    fn registration_flow() {
        let mut f = fixture(1);
        let mut phone = phone_setup(f.kp.pk.clone());
        assert_eq!(
            phone.finish_reg(&PhoneRegResponse {
                sig: BlindSignature {
                    s1: G1Affine::default(),
                    s2: G1Affine::default()
                },
                ent: Scalar::from(1u64),
                rev: Scalar::from(1u64),
            }),
            Err(PhoneError::NotPrepared)
        );
        let req = phone.prepare_reg(&mut f.rng).unwrap();
        let req2 = phone_setup(f.kp.pk.clone())
            .prepare_reg(&mut f.rng)
            .unwrap();
        assert_ne!(req.commitment(), req2.commitment());
        assert!(req.verify(&f.kp.pk, &[ATTR_KEY]));
        let (resp, token) = rs_process_reg_phone(&f.kp, 9, &req, &mut f.rng).unwrap();
        assert!(revocation_token_is_well_formed(&token, &resp.rev));
        // A response for this phone does not fit a different pending phone.
        let mut other = phone_setup(f.kp.pk.clone());
        other.prepare_reg(&mut f.rng).unwrap();
        assert!(matches!(
            other.finish_reg(&resp),
            Err(PhoneError::Credential(_))
        ));
        assert_eq!(phone.finish_reg(&resp).unwrap().0, 9);
        assert_eq!(
            phone.prepare_reg(&mut f.rng).unwrap_err(),
            PhoneError::AlreadyRegistered
        );
    }

    #[test]
    fn forged_request_and_wrong_key_are_rejected() {
        let mut f = fixture(2);
        let mut phone = phone_setup(f.kp.pk.clone());
        let req = phone.prepare_reg(&mut f.rng).unwrap();
        let forged = req.with_commitment(blstrs::G1Projective::generator().to_affine());
        assert!(rs_process_reg_phone(&f.kp, 1, &forged, &mut f.rng).is_err());

        let other = abc_gen(PHONE_ATTRS, &mut f.rng).unwrap();
        let mut phone = phone_setup(other.pk.clone());
        let req = phone.prepare_reg(&mut f.rng).unwrap();
        // The request was built against `other.pk`, so `kp` rejects it.
        assert!(rs_process_reg_phone(&f.kp, 1, &req, &mut f.rng).is_err());
    }

    #[test]
    fn showup_and_verify() {
        let mut f = fixture(3);
        let (mut phone, _) = f.registered(6);
        let bl = PhoneBlocklist::new();
        let a = phone.showup(&f.pc, 1, &bl, &mut f.rng).unwrap().unwrap();
        assert_eq!(a.ent, 6);
        assert_eq!(ds_verify_ent_phone(&f.kp.pk, &f.pc, 1, &a, &bl), Ok(()));
        assert!(ds_verify_ent_phone(&f.kp.pk, &f.pc, 2, &a, &bl).is_err());
        assert_eq!(phone.showup(&f.pc, 1, &bl, &mut f.rng).unwrap(), None);
        let b = phone.showup(&f.pc, 2, &bl, &mut f.rng).unwrap().unwrap();
        assert_eq!(ds_verify_ent_phone(&f.kp.pk, &f.pc, 2, &b, &bl), Ok(()));
        assert_ne!(a.tag, b.tag);
        assert_eq!(PhoneResponse::from_bytes(&b.to_bytes()).unwrap(), b);
    }

    #[test]
    fn own_token_on_blocklist_aborts() {
        let mut f = fixture(4);
        let (mut phone, token) = f.registered(2);
        let bl = PhoneBlocklist::from_entries([token]);
        assert_eq!(phone.showup(&f.pc, 1, &bl, &mut f.rng).unwrap(), None);
        assert_eq!(phone.epoch_last(), 0);
    }

    #[test]
    fn copies_share_tags() {
        let mut f = fixture(5);
        let (mut phone, _) = f.registered(2);
        let mut copy = phone.clone();
        let bl = PhoneBlocklist::new();
        let a = phone.showup(&f.pc, 3, &bl, &mut f.rng).unwrap().unwrap();
        let b = copy.showup(&f.pc, 3, &bl, &mut f.rng).unwrap().unwrap();
        assert_eq!(a.tag, b.tag);
    }

    #[test]
    fn message_sizes() {
        let mut f = fixture(6);
        let mut phone = phone_setup(f.kp.pk.clone());
        let req = phone.prepare_reg(&mut f.rng).unwrap();
        // version, C field, proof field
        assert_eq!(req.to_bytes().len(), 1 + (4 + 48) + (4 + 96));
        let (resp, _) = rs_process_reg_phone(&f.kp, 1, &req, &mut f.rng).unwrap();
        assert_eq!(resp.to_bytes().len(), 1 + (4 + 96) + (4 + 32) + (4 + 32));
        assert_eq!(
            PhoneRegResponse::from_bytes(&resp.to_bytes()).unwrap(),
            resp
        );
    }

    #[test]
    fn memory_round_trip() {
        let mut f = fixture(7);
        let (mut phone, _) = f.registered(2);
        let bl = PhoneBlocklist::new();
        phone.showup(&f.pc, 2, &bl, &mut f.rng).unwrap().unwrap();
        let mut restored = Phone::import_memory(&phone.export_memory()).unwrap();
        assert_eq!(restored.epoch_last(), 2);
        let a = phone.showup(&f.pc, 3, &bl, &mut f.rng).unwrap().unwrap();
        let b = restored.showup(&f.pc, 3, &bl, &mut f.rng).unwrap().unwrap();
        assert_eq!(a.tag, b.tag);
    }

    #[test]
    fn entitlement_decoding() {
        assert_eq!(scalar_to_u32(&Scalar::from(7u64)), Some(7));
        assert_eq!(
            scalar_to_u32(&Scalar::from(u64::from(u32::MAX))),
            Some(u32::MAX)
        );
        assert_eq!(scalar_to_u32(&Scalar::from(1u64 << 32)), None);
        assert_eq!(scalar_to_u32(&-Scalar::from(1u64)), None);
    }
}
