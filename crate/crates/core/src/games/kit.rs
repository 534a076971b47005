//! Scripted adversaries: guessing baselines and concrete attacks.
//!
//! Attacks are written once against [`KitScheme`], which supplies the few
//! system-specific manipulations (field tampering, random forgeries).

use std::sync::Arc;

use blstrs::{G1Affine, G1Projective, Scalar};
use group::prime::PrimeCurveAffine;
use group::{Curve, Group};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::experiments::{
    run_exp_aud, run_exp_ent, run_exp_ind, run_exp_rev, run_exp_sec, AudAdversary, AudClaim,
    EntAdversary, IndAdversary, IndChallenge, SecAdversary,
};
use super::{
    run_trials, Config, Experiment, OracleError, OracleKind, Oracles, TrialSummary, UserId,
};
use crate::abc::IssuerPublicKey;
use crate::blocklist::{Blocklist, BlocklistEntry};
use crate::card::{CardResponse, RevocationValue};
use crate::crypto::encoding::Wire;
use crate::crypto::group::random_scalar;
use crate::crypto::sig::Signature;
use crate::phone::{Phone, PhoneResponse};
use crate::protocol::{AidScheme, AuditProof, CardSystem, LogRecord, PhoneSystem, SystemParams};
use crate::showup::{
    prove_ignoring_blocklist, prove_showup, prove_with_witness, NonRevocationClause,
    PhoneBlocklist, RevocationToken, ShowupProof, Witness,
};

/// Ways a revoked phone may try to answer anyway.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RevForge {
    /// Run the prover with the revocation check switched off.
    Forced,
    /// As `Forced`, then replace the identity clause point with a random one.
    RandomClause,
    /// Prove with a fresh revocation secret that no entry matches.
    WrongRevocationKey,
    /// Use a credential from a key the adversary generated itself.
    SelfIssued,
}

/// System-specific tampering used by the generic attacks.
pub trait KitScheme: AidScheme {
    fn random_showup(epoch: u64, bl_len: usize, rng: &mut ChaCha20Rng) -> Self::Showup;
    fn random_revocation(rng: &mut ChaCha20Rng) -> Self::Revocation;
    fn with_ent(s: &Self::Showup, ent: u32) -> Self::Showup;
    /// Replaces the commitment with a fresh one to `(ent, r)`.
    fn with_opening(s: &Self::Showup, params: &SystemParams, ent: u32, r: Scalar) -> Self::Showup;
    /// Tag from `tag_from`, everything else from `rest_from`.
    fn splice(tag_from: &Self::Showup, rest_from: &Self::Showup) -> Self::Showup;
    fn entry_with_commitment(e: &Self::AuditEntry, com: G1Affine) -> Self::AuditEntry;
    /// `None` if the system has no such forgery path.
    fn forge_revoked(
        token: &Self::Token,
        params: &SystemParams,
        pk: &Self::PublicKey,
        epoch: u64,
        bl: &Blocklist<Self::Revocation>,
        how: RevForge,
        rng: &mut ChaCha20Rng,
    ) -> Option<Self::Showup>;
}

fn random_point(rng: &mut ChaCha20Rng) -> G1Affine {
    G1Projective::random(&mut *rng).to_affine()
}

impl KitScheme for CardSystem {
    fn random_showup(epoch: u64, _: usize, rng: &mut ChaCha20Rng) -> CardResponse {
        let mut tag = [0u8; 32];
        rng.fill_bytes(&mut tag);
        let sig = Signature::from_bytes(&random_point(rng).to_compressed()).expect("valid point");
        CardResponse {
            ent: rng.gen_range(1..10),
            tag,
            proof: crate::card::CardEntProof {
                sig,
                epoch,
                commitment: random_point(rng),
                r: random_scalar(rng),
            },
        }
    }

    fn random_revocation(rng: &mut ChaCha20Rng) -> RevocationValue {
        RevocationValue(rng.gen())
    }

    fn with_ent(s: &CardResponse, ent: u32) -> CardResponse {
        CardResponse { ent, ..*s }
    }

    fn with_opening(s: &CardResponse, params: &SystemParams, ent: u32, r: Scalar) -> CardResponse {
        let mut out = *s;
        out.ent = ent;
        out.proof.r = r;
        out.proof.commitment = params
            .pedersen
            .commit(&Scalar::from(u64::from(ent)), &r)
            .0
            .to_affine();
        out
    }

    fn splice(tag_from: &CardResponse, rest_from: &CardResponse) -> CardResponse {
        CardResponse {
            tag: tag_from.tag,
            ..*rest_from
        }
    }

    fn entry_with_commitment(e: &Self::AuditEntry, com: G1Affine) -> Self::AuditEntry {
        let mut e = *e;
        e.commitment = com;
        e
    }

    fn forge_revoked(
        _: &Self::Token,
        _: &SystemParams,
        _: &Self::PublicKey,
        _: u64,
        _: &Blocklist<RevocationValue>,
        _: RevForge,
        _: &mut ChaCha20Rng,
    ) -> Option<CardResponse> {
        // Card secrets never leave the card.
        None
    }
}

fn random_proof(clauses: usize, rng: &mut ChaCha20Rng) -> ShowupProof {
    ShowupProof {
        challenge: random_scalar(rng),
        sig: crate::abc::RandomizedSignature {
            s1: random_point(rng),
            s2: random_point(rng),
        },
        s_blind: random_scalar(rng),
        s_key: random_scalar(rng),
        s_ent: random_scalar(rng),
        s_rev: random_scalar(rng),
        a_tag: random_point(rng),
        a_com: random_point(rng),
        s_r: random_scalar(rng),
        rev_commitment: random_point(rng),
        a_rev: random_point(rng),
        s_gamma: random_scalar(rng),
        clauses: (0..clauses)
            .map(|_| NonRevocationClause {
                v: random_point(rng),
                a_link: random_point(rng),
                a_zero: random_point(rng),
                s_alpha: random_scalar(rng),
                s_rho: random_scalar(rng),
                s_delta: random_scalar(rng),
            })
            .collect(),
    }
}

fn phone_response(
    ent: u32,
    tag: G1Affine,
    commitment: G1Affine,
    r: Scalar,
    proof: ShowupProof,
) -> PhoneResponse {
    PhoneResponse {
        ent,
        tag,
        proof: crate::phone::PhoneEntProof {
            proof,
            commitment,
            r,
        },
    }
}

impl KitScheme for PhoneSystem {
    fn random_showup(_: u64, bl_len: usize, rng: &mut ChaCha20Rng) -> PhoneResponse {
        let ent = rng.gen_range(1..10);
        let (tag, com, r) = (random_point(rng), random_point(rng), random_scalar(rng));
        phone_response(ent, tag, com, r, random_proof(bl_len, rng))
    }

    fn random_revocation(rng: &mut ChaCha20Rng) -> RevocationToken {
        RevocationToken::for_secret(&random_scalar(rng))
    }

    fn with_ent(s: &PhoneResponse, ent: u32) -> PhoneResponse {
        PhoneResponse { ent, ..s.clone() }
    }

    fn with_opening(
        s: &PhoneResponse,
        params: &SystemParams,
        ent: u32,
        r: Scalar,
    ) -> PhoneResponse {
        let mut out = s.clone();
        out.ent = ent;
        out.proof.r = r;
        out.proof.commitment = params
            .pedersen
            .commit(&Scalar::from(u64::from(ent)), &r)
            .0
            .to_affine();
        out
    }

    fn splice(tag_from: &PhoneResponse, rest_from: &PhoneResponse) -> PhoneResponse {
        PhoneResponse {
            tag: tag_from.tag,
            ..rest_from.clone()
        }
    }

    fn entry_with_commitment(e: &Self::AuditEntry, com: G1Affine) -> Self::AuditEntry {
        let mut e = e.clone();
        e.commitment = com;
        e
    }

    fn forge_revoked(
        phone: &Phone,
        params: &SystemParams,
        pk: &IssuerPublicKey,
        epoch: u64,
        bl: &PhoneBlocklist,
        how: RevForge,
        rng: &mut ChaCha20Rng,
    ) -> Option<PhoneResponse> {
        let cred = phone.credential()?;
        let witness = Witness::from_credential(cred).ok()?;
        let ent = u32::try_from(u64::from_le_bytes(
            witness.ent.to_bytes_le()[..8].try_into().unwrap(),
        ))
        .ok()?;
        let r = random_scalar(rng);
        let pedersen = &params.pedersen;
        let (tag, com, proof) = match how {
            RevForge::Forced => {
                prove_ignoring_blocklist(pk, pedersen, cred, &witness, epoch, bl, &r, rng)
            }
            RevForge::RandomClause => {
                let (tag, com, mut proof) =
                    prove_ignoring_blocklist(pk, pedersen, cred, &witness, epoch, bl, &r, rng);
                for cl in &mut proof.clauses {
                    if bool::from(cl.v.is_identity()) {
                        cl.v = random_point(rng);
                    }
                }
                (tag, com, proof)
            }
            RevForge::WrongRevocationKey => {
                let w = Witness {
                    rev: random_scalar(rng),
                    ..witness
                };
                prove_with_witness(pk, pedersen, cred, &w, epoch, bl, &r, rng).ok()?
            }
            RevForge::SelfIssued => {
                let own = PhoneSystem::setup_rs(rng);
                let mut other = PhoneSystem::setup_token(&own.pk);
                let req = PhoneSystem::prepare_reg(&mut other, rng).ok()?;
                let (resp, _) = PhoneSystem::process_reg(&own, ent.max(1), &req, rng).ok()?;
                PhoneSystem::finish_reg(&mut other, &resp, rng).ok()?;
                let own_cred = other.credential()?;
                prove_showup(pk, pedersen, own_cred, epoch, bl, &r, rng).ok()?
            }
        };
        Some(phone_response(ent, tag, com, r, proof))
    }
}

// ---------------------------------------------------------------------------
// Shared helpers.

fn audit_claim<S: AidScheme>(
    epoch: u64,
    showups: &[S::Showup],
    bl: &Blocklist<S::Revocation>,
) -> (u64, AuditProof<S>) {
    let records: Vec<LogRecord<S>> = showups
        .iter()
        .map(|s| LogRecord {
            showup: s.clone(),
            bl_hash: bl.digest(),
        })
        .collect();
    crate::protocol::gen_audit_from_records(epoch, &records).expect("one blocklist")
}

fn empty_claim<S: AidScheme>() -> AudClaim<S> {
    AudClaim {
        epoch: 1,
        ent_sum: 0,
        proof: AuditProof {
            r_sum: Scalar::from(0u64),
            entries: Vec::new(),
            bl_hash: None,
        },
        blocklist: Blocklist::new(),
    }
}

/// Registers a user the adversary controls and keeps its token.
fn own_token<S: AidScheme>(
    o: &mut Oracles<'_, S>,
    id: UserId,
    ent: u32,
    rng: &mut ChaCha20Rng,
) -> Result<(S::Token, S::Revocation), OracleError> {
    let mut token = S::setup_token(o.public_key());
    let req = S::prepare_reg(&mut token, rng)?;
    let resp = o.mal_user_reg(id, ent, &req)?;
    let (_, rev) = S::finish_reg(&mut token, &resp, rng)?;
    Ok((token, rev))
}

/// A showup for `ent` at `epoch` that the adversary may replay: from its
/// own token if it may register malicious users, else via the showup
/// oracle on an honest user.
fn obtain_showup<S: AidScheme>(
    o: &mut Oracles<'_, S>,
    id: UserId,
    ent: u32,
    epoch: u64,
    rng: &mut ChaCha20Rng,
) -> Result<Option<S::Showup>, OracleError> {
    let bl = o.station_blocklist().clone();
    if o.allows(OracleKind::MalUserReg) {
        let (mut token, _) = own_token(o, id, ent, rng)?;
        let params = Arc::clone(o.params());
        Ok(S::showup(&params, &mut token, epoch, &bl, rng)?)
    } else {
        o.honest_reg(id, ent)?;
        o.showup(id, epoch, &bl)
    }
}

// ---------------------------------------------------------------------------
// IND.

/// Registers two equal households, never looks at anything, guesses 0.
pub struct IndBlindGuess<S: AidScheme> {
    rs: Option<S::RsKey>,
}

fn ind_register<S: AidScheme>(
    o: &mut Oracles<'_, S>,
    rs: &S::RsKey,
    id: UserId,
    ent: u32,
    rng: &mut ChaCha20Rng,
) -> Result<(), OracleError> {
    let req = o.prepare_reg(id)?;
    let (resp, _) = S::process_reg(rs, ent, &req, rng)?;
    o.finish_reg(id, &resp)
}

impl<S: AidScheme> IndAdversary<S> for IndBlindGuess<S> {
    fn name(&self) -> &'static str {
        "blind-guess"
    }

    fn setup(&mut self, _: &SystemParams, rng: &mut ChaCha20Rng) -> S::PublicKey {
        let rs = S::setup_rs(rng);
        let pk = S::public_key(&rs);
        self.rs = Some(rs);
        pk
    }

    fn choose(&mut self, o: &mut Oracles<'_, S>, rng: &mut ChaCha20Rng) -> IndChallenge<S> {
        let rs = self.rs.as_ref().expect("setup ran");
        let _ = ind_register(o, rs, 0, 3, rng);
        let _ = ind_register(o, rs, 1, 3, rng);
        IndChallenge {
            id0: 0,
            id1: 1,
            epoch: 1,
            blocklist: Blocklist::new(),
        }
    }

    fn guess(&mut self, _: Option<&S::Showup>, _: &mut ChaCha20Rng) -> bool {
        false
    }
}

/// Observes both households in an earlier epoch and picks the one whose
/// earlier output shares more bytes with the challenge output.
pub struct IndByteCompare<S: AidScheme> {
    rs: Option<S::RsKey>,
    seen: [Vec<u8>; 2],
}

fn shared_bytes(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x == y).count()
}

impl<S: AidScheme> IndAdversary<S> for IndByteCompare<S> {
    fn name(&self) -> &'static str {
        "byte-compare"
    }

    fn setup(&mut self, _: &SystemParams, rng: &mut ChaCha20Rng) -> S::PublicKey {
        let rs = S::setup_rs(rng);
        let pk = S::public_key(&rs);
        self.rs = Some(rs);
        pk
    }

    fn choose(&mut self, o: &mut Oracles<'_, S>, rng: &mut ChaCha20Rng) -> IndChallenge<S> {
        let rs = self.rs.as_ref().expect("setup ran");
        let bl = Blocklist::new();
        for id in 0..2 {
            let _ = ind_register(o, rs, id, 3, rng);
            if let Ok(Some(s)) = o.showup(id, 1, &bl) {
                self.seen[id as usize] = s.to_bytes();
            }
        }
        IndChallenge {
            id0: 0,
            id1: 1,
            epoch: 2,
            blocklist: bl,
        }
    }

    fn guess(&mut self, out: Option<&S::Showup>, _: &mut ChaCha20Rng) -> bool {
        let Some(out) = out else { return false };
        let bytes = out.to_bytes();
        shared_bytes(&bytes, &self.seen[1]) > shared_bytes(&bytes, &self.seen[0])
    }
}

/// Malicious registration station that installs a different key in the
/// second household's token, then checks which key the output verifies
/// under.
pub struct IndPerTokenKeys<S: AidScheme> {
    keys: Option<(S::RsKey, S::RsKey)>,
}

impl<S: AidScheme> IndAdversary<S> for IndPerTokenKeys<S> {
    fn name(&self) -> &'static str {
        "per-token-keys"
    }

    fn setup(&mut self, _: &SystemParams, rng: &mut ChaCha20Rng) -> S::PublicKey {
        let (a, b) = (S::setup_rs(rng), S::setup_rs(rng));
        let pk = S::public_key(&a);
        self.keys = Some((a, b));
        pk
    }

    fn choose(&mut self, o: &mut Oracles<'_, S>, rng: &mut ChaCha20Rng) -> IndChallenge<S> {
        let (a, b) = self.keys.as_ref().expect("setup ran");
        let _ = ind_register(o, a, 0, 3, rng);
        let _ = ind_register(o, b, 1, 3, rng);
        IndChallenge {
            id0: 0,
            id1: 1,
            epoch: 1,
            blocklist: Blocklist::new(),
        }
    }

    fn guess(&mut self, out: Option<&S::Showup>, _: &mut ChaCha20Rng) -> bool {
        let Some(out) = out else { return false };
        let (_, b) = self.keys.as_ref().expect("setup ran");
        let params = SystemParams::default();
        S::verify_ent(&params, &S::public_key(b), 1, out, &Blocklist::new())
    }
}

// ---------------------------------------------------------------------------
// AUD.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AudAttack {
    /// Lists one honest record twice.
    RecordReplay,
    /// Claims one more than the honest total.
    InflatedSum,
    /// Claims one more and shifts `r_sum` by a guess.
    RandomnessPerturbation,
    /// Swaps in a commitment to a larger entitlement with a known opening.
    ForgedOpening,
    /// Reuses a larger household's commitment in a smaller one's record.
    CommitmentSubstitution,
    /// Adds records from the previous epoch.
    CrossEpochSplice,
    /// Adds a record made of random group elements.
    RandomRecord,
    /// Audits against a different blocklist than the records were made for.
    BlocklistDowngrade,
    /// Shows a malicious token and its copy, listing both.
    MaliciousDoubleShow,
}

impl AudAttack {
    pub const ALL: [AudAttack; 9] = [
        AudAttack::RecordReplay,
        AudAttack::InflatedSum,
        AudAttack::RandomnessPerturbation,
        AudAttack::ForgedOpening,
        AudAttack::CommitmentSubstitution,
        AudAttack::CrossEpochSplice,
        AudAttack::RandomRecord,
        AudAttack::BlocklistDowngrade,
        AudAttack::MaliciousDoubleShow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AudAttack::RecordReplay => "record-replay",
            AudAttack::InflatedSum => "inflated-ent-sum",
            AudAttack::RandomnessPerturbation => "r-sum-perturbation",
            AudAttack::ForgedOpening => "forged-opening",
            AudAttack::CommitmentSubstitution => "commitment-substitution",
            AudAttack::CrossEpochSplice => "cross-epoch-splice",
            AudAttack::RandomRecord => "random-record",
            AudAttack::BlocklistDowngrade => "bl-downgrade",
            AudAttack::MaliciousDoubleShow => "malicious-double-show",
        }
    }
}

pub struct AudKit {
    pub attack: AudAttack,
}

const SMALL_ENT: u32 = 2;
const LARGE_ENT: u32 = 7;

impl AudKit {
    fn attempt<S: KitScheme>(
        &self,
        o: &mut Oracles<'_, S>,
        rng: &mut ChaCha20Rng,
    ) -> Result<AudClaim<S>, OracleError> {
        let params = Arc::clone(o.params());
        let mut bl = Blocklist::new();
        if self.attack == AudAttack::BlocklistDowngrade {
            bl.revoke(S::random_revocation(rng));
        }
        o.honest_reg(1, SMALL_ENT)?;
        o.honest_reg(2, LARGE_ENT)?;
        let epoch = if self.attack == AudAttack::CrossEpochSplice {
            2
        } else {
            1
        };
        let mut earlier = Vec::new();
        if epoch == 2 {
            for id in [1, 2] {
                earlier.extend(o.showup(id, 1, &bl)?);
            }
        }
        let mut shows = Vec::new();
        for id in [1, 2] {
            shows.extend(o.showup(id, epoch, &bl)?);
        }
        let (ent_sum, mut proof) = audit_claim::<S>(epoch, &shows, &bl);
        let mut claim_sum = ent_sum;
        let mut claim_bl = bl.clone();

        match self.attack {
            AudAttack::RecordReplay => {
                proof.entries.push(proof.entries[0].clone());
                claim_sum += u64::from(S::showup_ent(&shows[0]));
                proof.r_sum += S::showup_randomness(&shows[0]);
            }
            AudAttack::InflatedSum => claim_sum += 1,
            AudAttack::RandomnessPerturbation => {
                claim_sum += 1;
                proof.r_sum += random_scalar(rng);
            }
            AudAttack::ForgedOpening => {
                let r = random_scalar(rng);
                let forged = S::with_opening(&shows[0], &params, SMALL_ENT + 5, r);
                proof.entries[0] =
                    S::entry_with_commitment(&proof.entries[0], S::showup_commitment(&forged));
                proof.r_sum += r - S::showup_randomness(&shows[0]);
                claim_sum += 5;
            }
            AudAttack::CommitmentSubstitution => {
                proof.entries[0] =
                    S::entry_with_commitment(&proof.entries[0], S::showup_commitment(&shows[1]));
                proof.r_sum += S::showup_randomness(&shows[1]) - S::showup_randomness(&shows[0]);
                claim_sum += u64::from(LARGE_ENT - SMALL_ENT);
            }
            AudAttack::CrossEpochSplice => {
                let (extra_sum, extra) = audit_claim::<S>(epoch, &earlier, &bl);
                proof.entries.extend(extra.entries);
                proof.r_sum += extra.r_sum;
                claim_sum += extra_sum;
            }
            AudAttack::RandomRecord => {
                let fake = S::random_showup(epoch, bl.len(), rng);
                proof.entries.push(S::audit_entry(&fake));
                proof.r_sum += S::showup_randomness(&fake);
                claim_sum += u64::from(S::showup_ent(&fake));
            }
            AudAttack::BlocklistDowngrade => {
                claim_bl = Blocklist::new();
                proof.bl_hash = proof.bl_hash.map(|_| claim_bl.digest());
                claim_sum += 1;
            }
            AudAttack::MaliciousDoubleShow => {
                let (mut token, _) = own_token(o, 9, LARGE_ENT, rng)?;
                let mut copy = S::copy_token(o.public_key(), &token)?;
                let a = S::showup(&params, &mut token, epoch, &bl, rng)?;
                let b = S::showup(&params, &mut copy, epoch, &bl, rng)?;
                for s in a.iter().chain(b.iter()) {
                    proof.entries.push(S::audit_entry(s));
                    proof.r_sum += S::showup_randomness(s);
                    claim_sum += u64::from(S::showup_ent(s));
                }
            }
        }
        Ok(AudClaim {
            epoch,
            ent_sum: claim_sum,
            proof,
            blocklist: claim_bl,
        })
    }
}

impl<S: KitScheme> AudAdversary<S> for AudKit {
    fn name(&self) -> &'static str {
        self.attack.name()
    }

    fn run(&mut self, o: &mut Oracles<'_, S>, rng: &mut ChaCha20Rng) -> AudClaim<S> {
        self.attempt(o, rng).unwrap_or_else(|_| empty_claim())
    }
}

// ---------------------------------------------------------------------------
// ENT.

/// Shows `{1, 5}` at station 0 and `{3, 3}` at station 1.
fn ent_two_worlds<S: AidScheme>(o: &mut Oracles<'_, S>) -> Result<u64, OracleError> {
    for (id, ent) in [(0, 1), (1, 5), (2, 3), (3, 3)] {
        o.honest_reg(id, ent)?;
    }
    let bl = Blocklist::new();
    o.showup_two(0, 2, 1, &bl)?;
    o.showup_two(1, 3, 1, &bl)?;
    Ok(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntProbe {
    /// Always guesses 0.
    BlindGuess,
    /// Compares the two records' commitment bytes position by position.
    ByteCompare,
    /// Buckets commitment bytes and guesses from bucket collisions.
    HistogramProbe,
    /// Tries to get one household recorded twice at station 0 so the totals
    /// match while the tags give the world away.
    CrossStationReplay,
}

impl EntProbe {
    pub const ALL: [EntProbe; 4] = [
        EntProbe::BlindGuess,
        EntProbe::ByteCompare,
        EntProbe::HistogramProbe,
        EntProbe::CrossStationReplay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EntProbe::BlindGuess => "blind-guess",
            EntProbe::ByteCompare => "byte-compare",
            EntProbe::HistogramProbe => "histogram-probe",
            EntProbe::CrossStationReplay => "cross-station-replay",
        }
    }
}

pub struct EntKit {
    pub probe: EntProbe,
}

impl<S: AidScheme> EntAdversary<S> for EntKit {
    fn name(&self) -> &'static str {
        self.probe.name()
    }

    fn choose(&mut self, o: &mut Oracles<'_, S>, _: &mut ChaCha20Rng) -> u64 {
        let run = |o: &mut Oracles<'_, S>| -> Result<u64, OracleError> {
            if self.probe == EntProbe::CrossStationReplay {
                for (id, ent) in [(0, 2), (1, 2), (2, 2)] {
                    o.honest_reg(id, ent)?;
                }
                let bl = Blocklist::new();
                o.showup_two(0, 1, 1, &bl)?;
                o.showup_two(0, 2, 1, &bl)?;
                Ok(1)
            } else {
                ent_two_worlds(o)
            }
        };
        run(o).unwrap_or(1)
    }

    fn guess(&mut self, proof: &AuditProof<S>, _: &mut ChaCha20Rng) -> bool {
        let coms: Vec<[u8; 48]> = proof
            .entries
            .iter()
            .map(|e| S::entry_commitment(e).to_compressed())
            .collect();
        match self.probe {
            EntProbe::BlindGuess => false,
            EntProbe::ByteCompare => {
                let (Some(a), Some(b)) = (coms.first(), coms.get(1)) else {
                    return false;
                };
                let greater = a.iter().zip(b).filter(|(x, y)| x > y).count();
                greater * 2 > a.len()
            }
            EntProbe::HistogramProbe => {
                let mut buckets = [0usize; 8];
                for c in &coms {
                    buckets[usize::from(c[47] % 8)] += 1;
                }
                buckets.iter().any(|&n| n > 1)
            }
            EntProbe::CrossStationReplay => {
                let mut tags: Vec<Vec<u8>> = proof.entries.iter().map(S::entry_tag_bytes).collect();
                tags.sort();
                tags.dedup();
                tags.len() == proof.entries.len()
            }
        }
    }
}

// ---------------------------------------------------------------------------
// SEC and REV.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SecAttack {
    /// Presents the same household twice in one epoch.
    CloneDoubleDip,
    /// Presents an output from the previous epoch.
    StaleEpochReplay,
    /// Raises the entitlement field.
    EntInflation,
    /// Replaces the commitment with one to a larger value it can open.
    ForgedOpening,
    /// Puts one household's tag on another's proof.
    ProofSplice,
    /// Submits random group elements.
    RandomForgery,
}

impl SecAttack {
    pub const ALL: [SecAttack; 6] = [
        SecAttack::CloneDoubleDip,
        SecAttack::StaleEpochReplay,
        SecAttack::EntInflation,
        SecAttack::ForgedOpening,
        SecAttack::ProofSplice,
        SecAttack::RandomForgery,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SecAttack::CloneDoubleDip => "clone-double-dip",
            SecAttack::StaleEpochReplay => "stale-epoch-replay",
            SecAttack::EntInflation => "ent-inflation",
            SecAttack::ForgedOpening => "forged-opening",
            SecAttack::ProofSplice => "proof-splice",
            SecAttack::RandomForgery => "random-forgery",
        }
    }
}

pub struct SecKit {
    pub attack: SecAttack,
}

impl SecKit {
    fn attempt<S: KitScheme>(
        &self,
        o: &mut Oracles<'_, S>,
        rng: &mut ChaCha20Rng,
    ) -> Result<u64, OracleError> {
        let params = Arc::clone(o.params());
        match self.attack {
            SecAttack::CloneDoubleDip => {
                let bl = o.station_blocklist().clone();
                if o.allows(OracleKind::MalUserReg) {
                    let (mut token, _) = own_token(o, 1, LARGE_ENT, rng)?;
                    let mut copy = S::copy_token(o.public_key(), &token)?;
                    for t in [&mut token, &mut copy] {
                        if let Some(s) = S::showup(&params, t, 1, &bl, rng)? {
                            o.verify_ent(1, &s)?;
                        }
                    }
                } else {
                    o.honest_reg(1, LARGE_ENT)?;
                    let first = o.showup(1, 1, &bl)?;
                    let again = o.showup(1, 1, &bl)?;
                    for s in first.iter().chain(first.iter()).chain(again.iter()) {
                        o.verify_ent(1, s)?;
                    }
                }
                Ok(1)
            }
            SecAttack::StaleEpochReplay => {
                if let Some(s) = obtain_showup(o, 1, LARGE_ENT, 1, rng)? {
                    o.verify_ent(2, &s)?;
                }
                Ok(2)
            }
            SecAttack::EntInflation => {
                if let Some(s) = obtain_showup(o, 1, SMALL_ENT, 1, rng)? {
                    o.verify_ent(1, &S::with_ent(&s, SMALL_ENT + 1))?;
                }
                Ok(1)
            }
            SecAttack::ForgedOpening => {
                if let Some(s) = obtain_showup(o, 1, SMALL_ENT, 1, rng)? {
                    let forged = S::with_opening(&s, &params, SMALL_ENT + 3, random_scalar(rng));
                    o.verify_ent(1, &forged)?;
                }
                Ok(1)
            }
            SecAttack::ProofSplice => {
                let a = obtain_showup(o, 1, SMALL_ENT, 1, rng)?;
                let b = obtain_showup(o, 2, LARGE_ENT, 1, rng)?;
                if let (Some(a), Some(b)) = (a, b) {
                    o.verify_ent(1, &S::splice(&a, &b))?;
                    o.verify_ent(1, &b)?;
                }
                Ok(1)
            }
            SecAttack::RandomForgery => {
                let n = o.station_blocklist().len();
                for _ in 0..2 {
                    o.verify_ent(1, &S::random_showup(1, n, rng))?;
                }
                Ok(1)
            }
        }
    }
}

impl<S: KitScheme> SecAdversary<S> for SecKit {
    fn name(&self) -> &'static str {
        self.attack.name()
    }

    fn run(&mut self, o: &mut Oracles<'_, S>, rng: &mut ChaCha20Rng) -> u64 {
        self.attempt(o, rng).unwrap_or(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RevAttack {
    /// Runs the honest token against the station's blocklist.
    HonestToken,
    /// Proves against a blocklist without the user's entry.
    BlocklistDowngrade,
    /// Replays an output made before the revocation.
    PreRevocationReplay,
    Forge(RevForge),
    RandomForgery,
}

impl RevAttack {
    pub const ALL: [RevAttack; 8] = [
        RevAttack::HonestToken,
        RevAttack::BlocklistDowngrade,
        RevAttack::PreRevocationReplay,
        RevAttack::Forge(RevForge::Forced),
        RevAttack::Forge(RevForge::RandomClause),
        RevAttack::Forge(RevForge::WrongRevocationKey),
        RevAttack::Forge(RevForge::SelfIssued),
        RevAttack::RandomForgery,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RevAttack::HonestToken => "revoked-honest-token",
            RevAttack::BlocklistDowngrade => "bl-downgrade",
            RevAttack::PreRevocationReplay => "pre-revocation-replay",
            RevAttack::Forge(RevForge::Forced) => "forced-proof",
            RevAttack::Forge(RevForge::RandomClause) => "random-clause",
            RevAttack::Forge(RevForge::WrongRevocationKey) => "wrong-revocation-key",
            RevAttack::Forge(RevForge::SelfIssued) => "self-issued-credential",
            RevAttack::RandomForgery => "random-forgery",
        }
    }
}

/// Revoked malicious user trying to be served anyway. Unrelated revoked
/// entries pad the blocklist so the proofs carry several clauses.
pub struct RevKit {
    pub attack: RevAttack,
}

const REV_ID: UserId = 7;

impl RevKit {
    fn attempt<S: KitScheme>(
        &self,
        o: &mut Oracles<'_, S>,
        rng: &mut ChaCha20Rng,
    ) -> Result<u64, OracleError> {
        let params = Arc::clone(o.params());
        let (mut token, own_rev) = own_token(o, REV_ID, LARGE_ENT, rng)?;
        let early = if self.attack == RevAttack::PreRevocationReplay {
            let mut early_copy = S::copy_token(o.public_key(), &token)?;
            S::showup(&params, &mut early_copy, 1, &Blocklist::new(), rng)?
        } else {
            None
        };
        for id in 0..2 {
            o.honest_reg(id, 1)?;
            o.revoke(id)?;
        }
        o.revoke(REV_ID)?;
        let bl = o.station_blocklist().clone();
        let epoch = 1;
        let attempts: Vec<S::Showup> = match self.attack {
            RevAttack::HonestToken => S::showup(&params, &mut token, epoch, &bl, rng)?
                .into_iter()
                .collect(),
            RevAttack::BlocklistDowngrade => {
                let mut partial = Blocklist::new();
                for e in bl
                    .iter()
                    .filter(|e| e.entry_bytes() != own_rev.entry_bytes())
                {
                    partial.revoke(e.clone());
                }
                S::showup(&params, &mut token, epoch, &partial, rng)?
                    .into_iter()
                    .collect()
            }
            RevAttack::PreRevocationReplay => early.into_iter().collect(),
            RevAttack::Forge(how) => {
                S::forge_revoked(&token, &params, o.public_key(), epoch, &bl, how, rng)
                    .into_iter()
                    .collect()
            }
            RevAttack::RandomForgery => vec![S::random_showup(epoch, bl.len(), rng)],
        };
        for s in &attempts {
            o.verify_ent(epoch, s)?;
        }
        Ok(epoch)
    }
}

impl<S: KitScheme> SecAdversary<S> for RevKit {
    fn name(&self) -> &'static str {
        self.attack.name()
    }

    fn run(&mut self, o: &mut Oracles<'_, S>, rng: &mut ChaCha20Rng) -> u64 {
        self.attempt(o, rng).unwrap_or(1)
    }
}

// ---------------------------------------------------------------------------
// Registry.

/// Challenge bit for a two-world experiment, drawn from the trial seed.
pub fn challenge_bit(seed: u64) -> bool {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(2);
    rng.next_u32() & 1 == 1
}

const IND_NAMES: [&str; 3] = ["blind-guess", "byte-compare", "per-token-keys"];

pub fn adversary_names(experiment: Experiment) -> Vec<&'static str> {
    match experiment {
        Experiment::Ind => IND_NAMES.to_vec(),
        Experiment::Aud => AudAttack::ALL.iter().map(|a| a.name()).collect(),
        Experiment::Ent => EntProbe::ALL.iter().map(|a| a.name()).collect(),
        Experiment::Sec => SecAttack::ALL.iter().map(|a| a.name()).collect(),
        Experiment::Rev => RevAttack::ALL.iter().map(|a| a.name()).collect(),
    }
}

fn ind_adversary<S: AidScheme>(name: &str) -> Option<Box<dyn IndAdversary<S>>> {
    Some(match name {
        "blind-guess" => Box::new(IndBlindGuess::<S> { rs: None }),
        "byte-compare" => Box::new(IndByteCompare::<S> {
            rs: None,
            seen: Default::default(),
        }),
        "per-token-keys" => Box::new(IndPerTokenKeys::<S> { keys: None }),
        _ => return None,
    })
}

/// Runs the named adversary in `experiment` once per seed. `None` if the
/// experiment has no adversary of that name.
pub fn run_named<S: KitScheme>(
    params: &Arc<SystemParams>,
    experiment: Experiment,
    name: &str,
    seeds: std::ops::Range<u64>,
) -> Option<TrialSummary> {
    let config = Config::of::<S>();
    let summary = match experiment {
        Experiment::Ind => {
            ind_adversary::<S>(name)?;
            run_trials(experiment, config, name, seeds, |seed| {
                let mut adv = ind_adversary::<S>(name).expect("checked above");
                run_exp_ind::<S, _>(params, adv.as_mut(), challenge_bit(seed), seed)
            })
        }
        Experiment::Aud => {
            let attack = *AudAttack::ALL.iter().find(|a| a.name() == name)?;
            run_trials(experiment, config, name, seeds, |seed| {
                run_exp_aud::<S, _>(params, &mut AudKit { attack }, seed)
            })
        }
        Experiment::Ent => {
            let probe = *EntProbe::ALL.iter().find(|a| a.name() == name)?;
            run_trials(experiment, config, name, seeds, |seed| {
                run_exp_ent::<S, _>(params, &mut EntKit { probe }, challenge_bit(seed), seed)
            })
        }
        Experiment::Sec => {
            let attack = *SecAttack::ALL.iter().find(|a| a.name() == name)?;
            run_trials(experiment, config, name, seeds, |seed| {
                run_exp_sec::<S, _>(params, &mut SecKit { attack }, seed)
            })
        }
        Experiment::Rev => {
            let attack = *RevAttack::ALL.iter().find(|a| a.name() == name)?;
            run_trials(experiment, config, name, seeds, |seed| {
                run_exp_rev::<S, _>(params, &mut RevKit { attack }, seed)
            })
        }
    };
    Some(summary)
}
