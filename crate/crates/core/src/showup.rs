//! The phone's distribution proof.
//!
//! One Fiat-Shamir challenge covers five relations that share responses:
//! possession of a credential on `(k, ent, r_H)`, the tag `tau = H(eps)^k`,
//! the entitlement commitment `Com = g^ent h^r`, a hiding commitment
//! `C_r = g^{r_H} h^gamma`, and for every blocklist pair `(h_j, H_j)` a
//! value `V_j = (h_j^{r_H} H_j^{-1})^{rho_j}` with proofs that
//! `V_j = h_j^{alpha_j} H_j^{-rho_j}` and `C_r^{rho_j} = g^{alpha_j} h^{delta_j}`.
//! The second equation pins `alpha_j = r_H rho_j`, so `V_j != 1` means
//! `H_j != h_j^{r_H}`.
//!
//! Announcements for the G1 relations are sent with the proof so the
//! verifier can check all of them in one multi-exponentiation.

use std::collections::{BTreeMap, HashMap};

use blstrs::{G1Affine, G1Projective, Scalar};
use ff::{Field, PrimeField};
use group::{prime::PrimeCurveAffine, Curve, Group};
use rand_core::{CryptoRng, RngCore};
use sha2::{Digest, Sha512};
use thiserror::Error;

use crate::abc::{
    show_commit, show_recompute, Credential, IssuerPublicKey, RandomizedSignature, ShowResponses,
};
use crate::blocklist::{blocklist_hash, Blocklist, BlocklistEntry, EntryKind};
use crate::crypto::encoding::{
    g1_from_bytes, DecodeError, Decoder, Encoder, Packer, Wire, G1_LEN, SCALAR_LEN,
};
use crate::crypto::group::{
    hash_to_group, is_identity, normalize, random_nonzero_scalar, random_scalar, FixedBase,
    Transcript,
};
use crate::crypto::pedersen::PedersenParams;

pub const ATTR_KEY: usize = 0;
pub const ATTR_ENT: usize = 1;
pub const ATTR_REV: usize = 2;
pub const PHONE_ATTRS: usize = 3;

pub const TAG_DOMAIN: &[u8] = b"tag-v1";
const CONTEXT: &[u8] = b"showup v1";
const BATCH_CONTEXT: &[u8] = b"showup batch v1";

const PS_FIELD_LEN: usize = 2 * G1_LEN + 4 * SCALAR_LEN;
const COM_FIELD_LEN: usize = G1_LEN + SCALAR_LEN;
const REVKEY_FIELD_LEN: usize = 2 * G1_LEN + SCALAR_LEN;
pub const CLAUSE_FIELD_LEN: usize = 3 * G1_LEN + 3 * SCALAR_LEN;

/// Base for the household tag in epoch `epoch`.
pub fn tag_base(epoch: u64) -> G1Projective {
    hash_to_group(TAG_DOMAIN, &epoch.to_be_bytes())
}

/// Blocklist entry for phones: `(h, H)`, revoking any credential with
/// `H = h^{r_H}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RevocationToken {
    pub base: G1Affine,
    pub value: G1Affine,
}

impl RevocationToken {
    pub fn for_secret(r_h: &Scalar) -> Self {
        let g = G1Projective::generator();
        RevocationToken {
            base: g.to_affine(),
            value: (g * r_h).to_affine(),
        }
    }

    pub fn matches(&self, r_h: &Scalar) -> bool {
        (G1Projective::from(self.base) * r_h).to_affine() == self.value
    }
}

impl BlocklistEntry for RevocationToken {
    const KIND: EntryKind = EntryKind::PhonePair;

    fn entry_bytes(&self) -> Vec<u8> {
        Packer::new().g1(&self.base).g1(&self.value).into_inner()
    }

    fn from_entry_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
        if bytes.len() != 2 * G1_LEN {
            return Err(DecodeError::FieldLength {
                expected: 2 * G1_LEN,
                found: bytes.len(),
            });
        }
        let base = g1_from_bytes(bytes[..G1_LEN].try_into().unwrap())?;
        let value = g1_from_bytes(bytes[G1_LEN..].try_into().unwrap())?;
        if bool::from(base.is_identity()) {
            return Err(DecodeError::Invalid("revocation base"));
        }
        Ok(RevocationToken { base, value })
    }
}

pub type PhoneBlocklist = Blocklist<RevocationToken>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NonRevocationClause {
    pub v: G1Affine,
    pub a_link: G1Affine,
    pub a_zero: G1Affine,
    pub s_alpha: Scalar,
    pub s_rho: Scalar,
    pub s_delta: Scalar,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShowupProof {
    pub challenge: Scalar,
    pub sig: RandomizedSignature,
    pub s_blind: Scalar,
    pub s_key: Scalar,
    pub s_ent: Scalar,
    pub s_rev: Scalar,
    pub a_tag: G1Affine,
    pub a_com: G1Affine,
    pub s_r: Scalar,
    pub rev_commitment: G1Affine,
    pub a_rev: G1Affine,
    pub s_gamma: Scalar,
    pub clauses: Vec<NonRevocationClause>,
}

/// Public inputs of a showup proof.
#[derive(Debug, Clone, Copy)]
pub struct ShowupStatement<'a> {
    pub pk: &'a IssuerPublicKey,
    pub pedersen: &'a PedersenParams,
    pub epoch: u64,
    pub tag: G1Affine,
    pub commitment: G1Affine,
    pub blocklist: &'a PhoneBlocklist,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProveError {
    #[error("credential is revoked by blocklist entry {0}")]
    Revoked(usize),
    #[error("credential has {0} attributes, expected {PHONE_ATTRS}")]
    AttributeCount(usize),
}

/// Which check rejected a proof. Meant for station-side logs only.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum ShowupReject {
    #[error("clause count does not match the blocklist")]
    ClauseCount,
    #[error("credential possession")]
    Possession,
    #[error("challenge mismatch")]
    Challenge,
    #[error("tag relation")]
    Tag,
    #[error("commitment relation")]
    Commitment,
    #[error("revocation-key commitment relation")]
    RevocationKey,
    #[error("non-revocation clause {0}")]
    NonRevocation(usize),
    #[error("commitment opening")]
    Opening,
}

/// Secret inputs. Normally all taken from one credential; kept separate so
/// tests can exercise mixed witnesses.
#[derive(Clone)]
pub(crate) struct Witness {
    pub key: Scalar,
    pub ent: Scalar,
    pub rev: Scalar,
}

impl Witness {
    pub(crate) fn from_credential(cred: &Credential) -> Result<Self, ProveError> {
        let a = cred.attrs();
        if a.len() != PHONE_ATTRS {
            return Err(ProveError::AttributeCount(a.len()));
        }
        Ok(Witness {
            key: a[ATTR_KEY],
            ent: a[ATTR_ENT],
            rev: a[ATTR_REV],
        })
    }
}

/// Caches `base^{r_H}` per distinct blocklist base; honest entries all use
/// the group generator.
struct PowerCache<'a> {
    pedersen: &'a PedersenParams,
    g: G1Affine,
    exp: Scalar,
    g_power: Option<G1Projective>,
    other: HashMap<[u8; G1_LEN], G1Projective>,
}

impl<'a> PowerCache<'a> {
    fn new(pedersen: &'a PedersenParams, exp: Scalar) -> Self {
        PowerCache {
            pedersen,
            g: pedersen.g().to_affine(),
            exp,
            g_power: None,
            other: HashMap::new(),
        }
    }

    fn get(&mut self, base: &G1Affine) -> G1Projective {
        if *base == self.g {
            let (t, e) = (self.pedersen.g_table(), self.exp);
            *self.g_power.get_or_insert_with(|| t.mul(&e))
        } else {
            let e = self.exp;
            *self
                .other
                .entry(base.to_compressed())
                .or_insert_with(|| G1Projective::from(*base) * e)
        }
    }
}

/// Returns the index of the first blocklist entry that revokes `r_h`.
pub fn find_revoking_entry(
    pedersen: &PedersenParams,
    bl: &PhoneBlocklist,
    r_h: &Scalar,
) -> Option<usize> {
    let mut cache = PowerCache::new(pedersen, *r_h);
    bl.iter()
        .position(|e| cache.get(&e.base).to_affine() == e.value)
}

/// Builds `(tau, Com, proof)` for `cred` at `epoch`, committing to the
/// entitlement with randomness `r`.
pub fn prove_showup<R: RngCore + CryptoRng>(
    pk: &IssuerPublicKey,
    pedersen: &PedersenParams,
    cred: &Credential,
    epoch: u64,
    bl: &PhoneBlocklist,
    r: &Scalar,
    rng: &mut R,
) -> Result<(G1Affine, G1Affine, ShowupProof), ProveError> {
    let w = Witness::from_credential(cred)?;
    prove_with_witness(pk, pedersen, cred, &w, epoch, bl, r, rng)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn prove_with_witness<R: RngCore + CryptoRng>(
    pk: &IssuerPublicKey,
    pedersen: &PedersenParams,
    cred: &Credential,
    w: &Witness,
    epoch: u64,
    bl: &PhoneBlocklist,
    r: &Scalar,
    rng: &mut R,
) -> Result<(G1Affine, G1Affine, ShowupProof), ProveError> {
    prove_inner(pk, pedersen, cred, w, epoch, bl, r, true, rng)
}

/// Runs the prover even when a blocklist entry matches; the matching
/// clause then carries the identity. Used by the forge kit.
#[allow(clippy::too_many_arguments)]
pub(crate) fn prove_ignoring_blocklist<R: RngCore + CryptoRng>(
    pk: &IssuerPublicKey,
    pedersen: &PedersenParams,
    cred: &Credential,
    w: &Witness,
    epoch: u64,
    bl: &PhoneBlocklist,
    r: &Scalar,
    rng: &mut R,
) -> (G1Affine, G1Affine, ShowupProof) {
    prove_inner(pk, pedersen, cred, w, epoch, bl, r, false, rng).expect("revocation check disabled")
}

#[allow(clippy::too_many_arguments)]
fn prove_inner<R: RngCore + CryptoRng>(
    pk: &IssuerPublicKey,
    pedersen: &PedersenParams,
    cred: &Credential,
    w: &Witness,
    epoch: u64,
    bl: &PhoneBlocklist,
    r: &Scalar,
    check_blocklist: bool,
    rng: &mut R,
) -> Result<(G1Affine, G1Affine, ShowupProof), ProveError> {
    let gt = pedersen.g_table();
    let ht = pedersen.h_table();
    let g = G1Projective::from(gt.base());

    // Revocation check first: an honest prover cannot build clause j if
    // H_j = h_j^{r_H}.
    let mut powers = PowerCache::new(pedersen, w.rev);
    let mut diffs = Vec::with_capacity(bl.len());
    for (j, e) in bl.iter().enumerate() {
        let d = powers.get(&e.base) - G1Projective::from(e.value);
        if check_blocklist && is_identity(&d) {
            return Err(ProveError::Revoked(j));
        }
        diffs.push(d);
    }

    let h_eps = tag_base(epoch);
    let tag = h_eps * w.key;
    let com = pedersen.commit(&w.ent, r).0;
    let gamma = random_scalar(rng);
    let rev_com = gt.mul(&w.rev) + ht.mul(&gamma);

    let n_key = random_scalar(rng);
    let n_ent = random_scalar(rng);
    let n_rev = random_scalar(rng);
    let n_r = random_scalar(rng);
    let n_gamma = random_scalar(rng);

    let ps = show_commit(
        pk,
        cred,
        BTreeMap::from([(ATTR_KEY, n_key), (ATTR_ENT, n_ent), (ATTR_REV, n_rev)]),
        rng,
    );
    let a_tag = h_eps * n_key;
    let a_com = gt.mul(&n_ent) + ht.mul(&n_r);
    let a_rev = gt.mul(&n_rev) + ht.mul(&n_gamma);

    // C_r is a fixed base across all clauses; a small table pays off once
    // there are a handful of them.
    let rev_table = (bl.len() >= 8).then(|| FixedBase::with_window(&rev_com, 4));
    let rev_mul = |s: &Scalar| match &rev_table {
        Some(t) => t.mul(s),
        None => rev_com * s,
    };

    struct ClauseSecrets {
        rho: Scalar,
        n_alpha: Scalar,
        n_rho: Scalar,
        n_delta: Scalar,
    }
    let mut secrets = Vec::with_capacity(bl.len());
    let mut points = Vec::with_capacity(5 + 3 * bl.len());
    points.extend_from_slice(&[tag, com, rev_com, a_tag, a_com, a_rev]);
    for (e, d) in bl.iter().zip(&diffs) {
        let s = ClauseSecrets {
            rho: random_nonzero_scalar(rng),
            n_alpha: random_scalar(rng),
            n_rho: random_scalar(rng),
            n_delta: random_scalar(rng),
        };
        let h_j = G1Projective::from(e.base);
        let big_h = G1Projective::from(e.value);
        let h_alpha = if h_j == g {
            gt.mul(&s.n_alpha)
        } else {
            h_j * s.n_alpha
        };
        let g_alpha = if h_j == g {
            h_alpha
        } else {
            gt.mul(&s.n_alpha)
        };
        points.push(d * s.rho);
        points.push(h_alpha - big_h * s.n_rho);
        points.push(rev_mul(&s.n_rho) - g_alpha - ht.mul(&s.n_delta));
        secrets.push(s);
    }
    let points = normalize(&points);
    let (tag, com, rev_com, a_tag, a_com, a_rev) = (
        points[0], points[1], points[2], points[3], points[4], points[5],
    );

    let mut proof = ShowupProof {
        challenge: Scalar::ZERO,
        sig: ps.sig,
        s_blind: Scalar::ZERO,
        s_key: Scalar::ZERO,
        s_ent: Scalar::ZERO,
        s_rev: Scalar::ZERO,
        a_tag,
        a_com,
        s_r: Scalar::ZERO,
        rev_commitment: rev_com,
        a_rev,
        s_gamma: Scalar::ZERO,
        clauses: points[6..]
            .chunks(3)
            .map(|c| NonRevocationClause {
                v: c[0],
                a_link: c[1],
                a_zero: c[2],
                s_alpha: Scalar::ZERO,
                s_rho: Scalar::ZERO,
                s_delta: Scalar::ZERO,
            })
            .collect(),
    };
    let stmt = ShowupStatement {
        pk,
        pedersen,
        epoch,
        tag,
        commitment: com,
        blocklist: bl,
    };
    let c = challenge(&stmt, &proof, &ps.announcement);
    let resp = ps.respond(cred, &c);
    proof.challenge = c;
    proof.s_blind = resp.blinding;
    proof.s_key = n_key + c * w.key;
    proof.s_ent = n_ent + c * w.ent;
    proof.s_rev = n_rev + c * w.rev;
    proof.s_r = n_r + c * r;
    proof.s_gamma = n_gamma + c * gamma;
    for (cl, s) in proof.clauses.iter_mut().zip(&secrets) {
        let alpha = w.rev * s.rho;
        let delta = gamma * s.rho;
        cl.s_alpha = s.n_alpha + c * alpha;
        cl.s_rho = s.n_rho + c * s.rho;
        cl.s_delta = s.n_delta + c * delta;
    }
    Ok((tag, com, proof))
}

fn challenge(
    stmt: &ShowupStatement<'_>,
    proof: &ShowupProof,
    ps_announcement: &blstrs::Gt,
) -> Scalar {
    let mut t = Transcript::new(CONTEXT);
    t.append(b"pk", stmt.pk.digest());
    t.append(
        b"pedersen-h",
        &stmt.pedersen.h().to_affine().to_compressed(),
    );
    t.append_u64(b"epoch", stmt.epoch);
    t.append_g1(b"tag", &stmt.tag);
    t.append_g1(b"com", &stmt.commitment);
    t.append(b"bl-hash", &blocklist_hash(stmt.blocklist));
    t.append_u64(b"bl-len", stmt.blocklist.len() as u64);
    t.append_g1(b"sig1", &proof.sig.s1);
    t.append_g1(b"sig2", &proof.sig.s2);
    t.append_gt(b"ps-announcement", ps_announcement);
    t.append_g1(b"a-tag", &proof.a_tag);
    t.append_g1(b"a-com", &proof.a_com);
    t.append_g1(b"rev-com", &proof.rev_commitment);
    t.append_g1(b"a-rev", &proof.a_rev);
    let mut clause_bytes = Vec::with_capacity(proof.clauses.len() * 3 * G1_LEN);
    for c in &proof.clauses {
        clause_bytes.extend_from_slice(&c.v.to_compressed());
        clause_bytes.extend_from_slice(&c.a_link.to_compressed());
        clause_bytes.extend_from_slice(&c.a_zero.to_compressed());
    }
    t.append(b"clauses", &clause_bytes);
    t.challenge()
}

/// 128-bit weights for the batched check, derived from the whole proof so
/// the prover cannot tune responses against them.
fn batch_weights(proof: &ShowupProof, count: usize) -> Vec<Scalar> {
    let mut h = Sha512::new();
    h.update(BATCH_CONTEXT);
    for s in [
        &proof.challenge,
        &proof.s_blind,
        &proof.s_key,
        &proof.s_ent,
        &proof.s_rev,
        &proof.s_r,
        &proof.s_gamma,
    ] {
        h.update(s.to_bytes_be());
    }
    for c in &proof.clauses {
        h.update(c.s_alpha.to_bytes_be());
        h.update(c.s_rho.to_bytes_be());
        h.update(c.s_delta.to_bytes_be());
    }
    let seed = h.finalize();
    let mut out = Vec::with_capacity(count);
    let mut block = 0u64;
    while out.len() < count {
        let digest = Sha512::new()
            .chain_update(seed)
            .chain_update(block.to_be_bytes())
            .finalize();
        for chunk in digest.chunks(16) {
            if out.len() < count {
                out.push(Scalar::from_u128(u128::from_be_bytes(
                    chunk.try_into().unwrap(),
                )));
            }
        }
        block += 1;
    }
    out
}

/// Verifies the proof against the statement. Does not check the opening of
/// the commitment; see [`verify_showup`].
pub fn verify_showup_proof(
    stmt: &ShowupStatement<'_>,
    proof: &ShowupProof,
) -> Result<(), ShowupReject> {
    if proof.clauses.len() != stmt.blocklist.len() {
        return Err(ShowupReject::ClauseCount);
    }
    if stmt.pk.attr_count() != PHONE_ATTRS {
        return Err(ShowupReject::Possession);
    }
    if let Some(j) = proof
        .clauses
        .iter()
        .position(|c| bool::from(c.v.is_identity()))
    {
        return Err(ShowupReject::NonRevocation(j));
    }
    let c = proof.challenge;
    let responses = ShowResponses {
        blinding: proof.s_blind,
        hidden: BTreeMap::from([
            (ATTR_KEY, proof.s_key),
            (ATTR_ENT, proof.s_ent),
            (ATTR_REV, proof.s_rev),
        ]),
    };
    let t = show_recompute(stmt.pk, &proof.sig, &BTreeMap::new(), &responses, &c)
        .ok_or(ShowupReject::Possession)?;
    if challenge(stmt, proof, &t) != c {
        return Err(ShowupReject::Challenge);
    }
    if batch_holds(stmt, proof) {
        Ok(())
    } else {
        Err(locate_failure(stmt, proof))
    }
}

fn batch_holds(stmt: &ShowupStatement<'_>, proof: &ShowupProof) -> bool {
    let n = proof.clauses.len();
    let w = batch_weights(proof, 3 + 2 * n);
    let c = proof.challenge;
    let g_aff = stmt.pedersen.g().to_affine();
    let h_aff = stmt.pedersen.h().to_affine();

    let mut g_coef = w[1] * proof.s_ent + w[2] * proof.s_rev;
    let mut h_coef = w[1] * proof.s_r + w[2] * proof.s_gamma;
    let mut rc_coef = -(w[2] * c);

    let mut points: Vec<G1Projective> = Vec::with_capacity(8 + 5 * n);
    let mut scalars: Vec<Scalar> = Vec::with_capacity(8 + 5 * n);
    let mut push = |p: &G1Affine, s: Scalar| {
        points.push(G1Projective::from(p));
        scalars.push(s);
    };
    push(&tag_base(stmt.epoch).to_affine(), w[0] * proof.s_key);
    push(&stmt.tag, -(w[0] * c));
    push(&proof.a_tag, -w[0]);
    push(&stmt.commitment, -(w[1] * c));
    push(&proof.a_com, -w[1]);
    push(&proof.a_rev, -w[2]);
    for (j, (cl, e)) in proof.clauses.iter().zip(stmt.blocklist.iter()).enumerate() {
        let (u, v) = (w[3 + 2 * j], w[4 + 2 * j]);
        // u * (s_alpha h_j - s_rho H_j - c V_j - A_link)
        if e.base == g_aff {
            g_coef += u * cl.s_alpha;
        } else {
            push(&e.base, u * cl.s_alpha);
        }
        push(&e.value, -(u * cl.s_rho));
        push(&cl.v, -(u * c));
        push(&cl.a_link, -u);
        // v * (s_rho C_r - s_alpha g - s_delta h - A_zero)
        rc_coef += v * cl.s_rho;
        g_coef -= v * cl.s_alpha;
        h_coef -= v * cl.s_delta;
        push(&cl.a_zero, -v);
    }
    push(&g_aff, g_coef);
    push(&h_aff, h_coef);
    push(&proof.rev_commitment, rc_coef);
    is_identity(&G1Projective::multi_exp(&points, &scalars))
}

/// Checks each relation separately to name the one that failed.
fn locate_failure(stmt: &ShowupStatement<'_>, proof: &ShowupProof) -> ShowupReject {
    let c = proof.challenge;
    let g = *stmt.pedersen.g();
    let h = *stmt.pedersen.h();
    let p = G1Projective::from;
    if tag_base(stmt.epoch) * proof.s_key != p(stmt.tag) * c + p(proof.a_tag) {
        return ShowupReject::Tag;
    }
    if g * proof.s_ent + h * proof.s_r != p(stmt.commitment) * c + p(proof.a_com) {
        return ShowupReject::Commitment;
    }
    let rc = p(proof.rev_commitment);
    if g * proof.s_rev + h * proof.s_gamma != rc * c + p(proof.a_rev) {
        return ShowupReject::RevocationKey;
    }
    for (j, (cl, e)) in proof.clauses.iter().zip(stmt.blocklist.iter()).enumerate() {
        let link = p(e.base) * cl.s_alpha - p(e.value) * cl.s_rho == p(cl.v) * c + p(cl.a_link);
        let zero = rc * cl.s_rho - g * cl.s_alpha - h * cl.s_delta == p(cl.a_zero);
        if !link || !zero {
            return ShowupReject::NonRevocation(j);
        }
    }
    // Every relation holds on its own, so the batch could only fail by a
    // weight collision; report it against the first relation.
    ShowupReject::Tag
}

/// Station-side check: the proof verifies and `Com` opens to `(ent, r)`.
pub fn verify_showup(
    stmt: &ShowupStatement<'_>,
    ent: &Scalar,
    r: &Scalar,
    proof: &ShowupProof,
) -> Result<(), ShowupReject> {
    let com = crate::crypto::pedersen::Commitment(G1Projective::from(stmt.commitment));
    if !stmt.pedersen.verify_opening(&com, ent, r) {
        return Err(ShowupReject::Opening);
    }
    verify_showup_proof(stmt, proof)
}

impl ShowupProof {
    pub fn encoded_len_for(clauses: usize) -> usize {
        1 + (4 + 4)
            + (4 + SCALAR_LEN)
            + (4 + PS_FIELD_LEN)
            + (4 + G1_LEN)
            + (4 + COM_FIELD_LEN)
            + (4 + REVKEY_FIELD_LEN)
            + clauses * (4 + CLAUSE_FIELD_LEN)
    }
}

impl Wire for ShowupProof {
    fn encode(&self, enc: &mut Encoder) {
        enc.u32(self.clauses.len() as u32).scalar(&self.challenge);
        enc.field(
            &Packer::new()
                .g1(&self.sig.s1)
                .g1(&self.sig.s2)
                .scalar(&self.s_blind)
                .scalar(&self.s_key)
                .scalar(&self.s_ent)
                .scalar(&self.s_rev)
                .into_inner(),
        );
        enc.g1(&self.a_tag);
        enc.field(&Packer::new().g1(&self.a_com).scalar(&self.s_r).into_inner());
        enc.field(
            &Packer::new()
                .g1(&self.rev_commitment)
                .g1(&self.a_rev)
                .scalar(&self.s_gamma)
                .into_inner(),
        );
        for c in &self.clauses {
            enc.field(
                &Packer::new()
                    .g1(&c.v)
                    .g1(&c.a_link)
                    .g1(&c.a_zero)
                    .scalar(&c.s_alpha)
                    .scalar(&c.s_rho)
                    .scalar(&c.s_delta)
                    .into_inner(),
            );
        }
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let n = dec.u32()? as usize;
        let challenge = dec.scalar()?;
        let mut r = dec.reader(PS_FIELD_LEN)?;
        let sig = RandomizedSignature {
            s1: r.g1()?,
            s2: r.g1()?,
        };
        let (s_blind, s_key, s_ent, s_rev) = (r.scalar()?, r.scalar()?, r.scalar()?, r.scalar()?);
        let a_tag = dec.g1()?;
        let mut r = dec.reader(COM_FIELD_LEN)?;
        let (a_com, s_r) = (r.g1()?, r.scalar()?);
        let mut r = dec.reader(REVKEY_FIELD_LEN)?;
        let (rev_commitment, a_rev, s_gamma) = (r.g1()?, r.g1()?, r.scalar()?);
        let mut clauses = Vec::new();
        for _ in 0..n {
            let mut r = dec.reader(CLAUSE_FIELD_LEN)?;
            clauses.push(NonRevocationClause {
                v: r.g1()?,
                a_link: r.g1()?,
                a_zero: r.g1()?,
                s_alpha: r.scalar()?,
                s_rho: r.scalar()?,
                s_delta: r.scalar()?,
            });
        }
        Ok(ShowupProof {
            challenge,
            sig,
            s_blind,
            s_key,
            s_ent,
            s_rev,
            a_tag,
            a_com,
            s_r,
            rev_commitment,
            a_rev,
            s_gamma,
            clauses,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abc::{
        abc_gen, abc_issue_request, abc_issue_sign, abc_issue_unblind, IssuerKeyPair,
    };
    use crate::crypto::pedersen::pc_gen;
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
        fn credential(&mut self, ent: u64) -> Credential {
            let k = random_scalar(&mut self.rng);
            let (req, st) =
                abc_issue_request(&self.kp.pk, &BTreeMap::from([(ATTR_KEY, k)]), &mut self.rng)
                    .unwrap();
            let issuer = BTreeMap::from([
                (ATTR_ENT, Scalar::from(ent)),
                (ATTR_REV, random_scalar(&mut self.rng)),
            ]);
            let sig =
                abc_issue_sign(&self.kp.sk, &self.kp.pk, &issuer, &req, &mut self.rng).unwrap();
            abc_issue_unblind(&self.kp.pk, &st, &issuer, &sig).unwrap()
        }

        fn unrelated_bl(&mut self, n: usize) -> PhoneBlocklist {
            Blocklist::from_entries(
                (0..n).map(|_| RevocationToken::for_secret(&random_scalar(&mut self.rng))),
            )
        }

        fn prove(
            &mut self,
            cred: &Credential,
            epoch: u64,
            bl: &PhoneBlocklist,
        ) -> (G1Affine, G1Affine, Scalar, ShowupProof) {
            let r = random_scalar(&mut self.rng);
            let (tag, com, proof) =
                prove_showup(&self.kp.pk, &self.pc, cred, epoch, bl, &r, &mut self.rng).unwrap();
            (tag, com, r, proof)
        }

        fn stmt<'a>(
            &'a self,
            epoch: u64,
            tag: G1Affine,
            com: G1Affine,
            bl: &'a PhoneBlocklist,
        ) -> ShowupStatement<'a> {
            ShowupStatement {
                pk: &self.kp.pk,
                pedersen: &self.pc,
                epoch,
                tag,
                commitment: com,
                blocklist: bl,
            }
        }
    }

    #[test]
    fn honest_proofs_verify_for_small_blocklists() {
        let mut f = fixture(1);
        let cred = f.credential(4);
        for n in [0, 1, 3] {
            let bl = f.unrelated_bl(n);
            let (tag, com, r, proof) = f.prove(&cred, 7, &bl);
            assert_eq!(proof.clauses.len(), n);
            let st = f.stmt(7, tag, com, &bl);
            assert_eq!(verify_showup(&st, &Scalar::from(4u64), &r, &proof), Ok(()));
            // Oracle: recompute the tag from the known key.
            assert_eq!(tag, (tag_base(7) * cred.attrs()[ATTR_KEY]).to_affine());
            assert!(proof.clauses.iter().all(|c| !bool::from(c.v.is_identity())));
        }
    }

    #[test]
    fn revoked_credential_cannot_prove() {
        let mut f = fixture(2);
        let cred = f.credential(4);
        let mut bl = f.unrelated_bl(2);
        bl.revoke(RevocationToken::for_secret(&cred.attrs()[ATTR_REV]));
        let pos = bl
            .iter()
            .position(|e| e.matches(&cred.attrs()[ATTR_REV]))
            .unwrap();
        assert_eq!(
            find_revoking_entry(&f.pc, &bl, &cred.attrs()[ATTR_REV]),
            Some(pos)
        );
        let r = random_scalar(&mut f.rng);
        assert_eq!(
            prove_showup(&f.kp.pk, &f.pc, &cred, 1, &bl, &r, &mut f.rng).unwrap_err(),
            ProveError::Revoked(pos)
        );
    }

    #[test]
    fn statement_binding() {
        let mut f = fixture(3);
        let cred = f.credential(4);
        let bl = f.unrelated_bl(2);
        let (tag, com, r, proof) = f.prove(&cred, 5, &bl);
        let ent = Scalar::from(4u64);

        let mut bigger = bl.clone();
        bigger.revoke(RevocationToken::for_secret(&Scalar::from(99u64)));
        assert_eq!(
            verify_showup(&f.stmt(5, tag, com, &bigger), &ent, &r, &proof),
            Err(ShowupReject::ClauseCount)
        );
        let mut swapped = f.unrelated_bl(2);
        assert_eq!(
            verify_showup(&f.stmt(5, tag, com, &swapped), &ent, &r, &proof),
            Err(ShowupReject::Challenge)
        );
        swapped = bl.clone();
        assert_eq!(
            verify_showup(&f.stmt(6, tag, com, &swapped), &ent, &r, &proof),
            Err(ShowupReject::Challenge)
        );
        assert_eq!(
            verify_showup(&f.stmt(5, tag, com, &bl), &(ent + Scalar::ONE), &r, &proof),
            Err(ShowupReject::Opening)
        );
        let other_tag = (tag_base(5) * Scalar::from(3u64)).to_affine();
        assert_eq!(
            verify_showup(&f.stmt(5, other_tag, com, &bl), &ent, &r, &proof),
            Err(ShowupReject::Challenge)
        );
    }

    #[test]
    fn tampered_responses_name_the_failing_relation() {
        let mut f = fixture(4);
        let cred = f.credential(2);
        let bl = f.unrelated_bl(3);
        let (tag, com, _, proof) = f.prove(&cred, 1, &bl);
        let st = f.stmt(1, tag, com, &bl);
        assert_eq!(verify_showup_proof(&st, &proof), Ok(()));

        let mut p = proof.clone();
        p.s_r += Scalar::ONE;
        assert_eq!(verify_showup_proof(&st, &p), Err(ShowupReject::Commitment));
        let mut p = proof.clone();
        p.s_gamma += Scalar::ONE;
        assert_eq!(
            verify_showup_proof(&st, &p),
            Err(ShowupReject::RevocationKey)
        );
        let mut p = proof.clone();
        p.clauses[2].s_delta += Scalar::ONE;
        assert_eq!(
            verify_showup_proof(&st, &p),
            Err(ShowupReject::NonRevocation(2))
        );
        // Shared responses also feed the possession relation, so changing
        // them moves the recomputed challenge.
        let mut p = proof.clone();
        p.s_key += Scalar::ONE;
        assert_eq!(verify_showup_proof(&st, &p), Err(ShowupReject::Challenge));
        let mut p = proof.clone();
        p.clauses[0].v = G1Affine::identity();
        assert_eq!(
            verify_showup_proof(&st, &p),
            Err(ShowupReject::NonRevocation(0))
        );
        let mut p = proof.clone();
        p.sig.s1 = G1Affine::identity();
        assert_eq!(verify_showup_proof(&st, &p), Err(ShowupReject::Possession));
        // Offsetting errors in two relations that share the base h.
        let mut p = proof.clone();
        p.s_r += Scalar::ONE;
        p.s_gamma -= Scalar::ONE;
        assert!(verify_showup_proof(&st, &p).is_err());
    }

    #[test]
    fn mixed_witnesses_fail() {
        let mut f = fixture(5);
        let a = f.credential(3);
        let b = f.credential(3);
        let bl = f.unrelated_bl(1);
        let w = Witness {
            key: b.attrs()[ATTR_KEY],
            ent: a.attrs()[ATTR_ENT],
            rev: a.attrs()[ATTR_REV],
        };
        let r = random_scalar(&mut f.rng);
        let (tag, com, proof) =
            prove_with_witness(&f.kp.pk, &f.pc, &a, &w, 2, &bl, &r, &mut f.rng).unwrap();
        assert!(verify_showup_proof(&f.stmt(2, tag, com, &bl), &proof).is_err());
    }

    #[test]
    fn tags_link_only_within_a_household() {
        let mut f = fixture(6);
        let cred = f.credential(1);
        let other = f.credential(1);
        let bl = PhoneBlocklist::new();
        let (t1, ..) = f.prove(&cred, 3, &bl);
        let (t2, ..) = f.prove(&cred, 3, &bl);
        let (t3, ..) = f.prove(&cred, 4, &bl);
        let (t4, ..) = f.prove(&other, 3, &bl);
        assert_eq!(t1, t2);
        assert_ne!(t1, t3);
        assert_ne!(t1, t4);
    }

    #[test]
    fn wire_round_trip_and_size() {
        let mut f = fixture(7);
        let cred = f.credential(1);
        for n in [0, 2] {
            let bl = f.unrelated_bl(n);
            let (.., proof) = f.prove(&cred, 1, &bl);
            let bytes = proof.to_bytes();
            assert_eq!(bytes.len(), ShowupProof::encoded_len_for(n));
            assert_eq!(ShowupProof::from_bytes(&bytes).unwrap(), proof);
            assert!(ShowupProof::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        }
        assert_eq!(
            ShowupProof::encoded_len_for(1) - ShowupProof::encoded_len_for(0),
            244
        );
    }

    #[test]
    fn non_generator_bases_are_supported() {
        let mut f = fixture(8);
        let cred = f.credential(1);
        let base = hash_to_group(b"other-base", b"").to_affine();
        let bl = Blocklist::from_entries([RevocationToken {
            base,
            value: (G1Projective::from(base) * Scalar::from(17u64)).to_affine(),
        }]);
        let (tag, com, _, proof) = f.prove(&cred, 1, &bl);
        assert_eq!(
            verify_showup_proof(&f.stmt(1, tag, com, &bl), &proof),
            Ok(())
        );
        let revoking = Blocklist::from_entries([RevocationToken {
            base,
            value: (G1Projective::from(base) * cred.attrs()[ATTR_REV]).to_affine(),
        }]);
        let r = random_scalar(&mut f.rng);
        assert!(prove_showup(&f.kp.pk, &f.pc, &cred, 1, &revoking, &r, &mut f.rng).is_err());
    }
}
