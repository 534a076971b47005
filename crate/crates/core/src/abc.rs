//! Pointcheval-Sanders attribute credentials: key generation, blind
//! issuance with user-hidden attributes, and selective-disclosure shows.
//!
//! Attribute indices are zero-based. The show relation is exposed in two
//! halves (`ShowNonces`/`show_recompute`) so larger proofs can share
//! responses with it under a single challenge.

use std::collections::BTreeMap;

use blstrs::{Bls12, G1Affine, G1Projective, G2Affine, G2Prepared, G2Projective, Gt, Scalar};
use group::{prime::PrimeCurveAffine, Curve, Group};
use pairing::{MillerLoopResult, MultiMillerLoop};
use rand_core::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::crypto::encoding::{DecodeError, Decoder, Encoder, Packer, Wire, G1_LEN, SCALAR_LEN};
use crate::crypto::group::{random_nonzero_scalar, random_scalar, Transcript};

const ISSUE_CONTEXT: &[u8] = b"ps-issue v1";
const SHOW_CONTEXT: &[u8] = b"ps-show v1";

/// Upper bound on attribute count accepted from untrusted key encodings.
pub const MAX_ATTRIBUTES: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AbcError {
    #[error("attribute count must be between 1 and {MAX_ATTRIBUTES}, got {0}")]
    AttributeCount(usize),
    #[error("attribute index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("issuer and user attribute sets must partition the attribute vector")]
    IndexPartition,
    #[error("issuance proof does not verify")]
    InvalidIssuanceProof,
    #[error("credential does not verify under the issuer key")]
    InvalidCredential,
}

#[derive(Clone)]
pub struct IssuerSecretKey {
    x: Scalar,
    x_g1: G1Affine,
    y: Vec<Scalar>,
}

impl std::fmt::Debug for IssuerSecretKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "IssuerSecretKey(L={})", self.y.len())
    }
}

#[derive(Clone)]
pub struct IssuerPublicKey {
    g: G1Affine,
    y_g1: Vec<G1Affine>,
    g2: G2Affine,
    x_g2: G2Affine,
    y_g2: Vec<G2Affine>,
    g2_prepared: G2Prepared,
    digest: [u8; 32],
}

impl std::fmt::Debug for IssuerPublicKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "IssuerPublicKey(L={}, {})",
            self.y_g1.len(),
            hex_prefix(&self.digest)
        )
    }
}

fn hex_prefix(d: &[u8]) -> String {
    d[..6].iter().map(|b| format!("{b:02x}")).collect()
}

impl PartialEq for IssuerPublicKey {
    fn eq(&self, other: &Self) -> bool {
        self.digest == other.digest
    }
}

impl Eq for IssuerPublicKey {}

#[derive(Debug, Clone)]
pub struct IssuerKeyPair {
    pub sk: IssuerSecretKey,
    pub pk: IssuerPublicKey,
}

pub fn abc_gen<R: RngCore + CryptoRng>(
    attr_count: usize,
    rng: &mut R,
) -> Result<IssuerKeyPair, AbcError> {
    if attr_count == 0 || attr_count > MAX_ATTRIBUTES {
        return Err(AbcError::AttributeCount(attr_count));
    }
    let x = random_nonzero_scalar(rng);
    let y: Vec<Scalar> = (0..attr_count)
        .map(|_| random_nonzero_scalar(rng))
        .collect();
    let g = G1Projective::generator();
    let g2 = G2Projective::generator();
    let sk = IssuerSecretKey {
        x,
        x_g1: (g * x).to_affine(),
        y: y.clone(),
    };
    let pk = IssuerPublicKey::new(
        g.to_affine(),
        y.iter().map(|yi| (g * yi).to_affine()).collect(),
        g2.to_affine(),
        (g2 * x).to_affine(),
        y.iter().map(|yi| (g2 * yi).to_affine()).collect(),
    );
    Ok(IssuerKeyPair { sk, pk })
}

impl IssuerPublicKey {
    fn new(
        g: G1Affine,
        y_g1: Vec<G1Affine>,
        g2: G2Affine,
        x_g2: G2Affine,
        y_g2: Vec<G2Affine>,
    ) -> Self {
        let mut pk = IssuerPublicKey {
            g,
            y_g1,
            g2,
            x_g2,
            y_g2,
            g2_prepared: G2Prepared::from(g2),
            digest: [0; 32],
        };
        pk.digest = Sha256::digest(pk.to_bytes()).into();
        pk
    }

    pub fn attr_count(&self) -> usize {
        self.y_g1.len()
    }

    pub fn digest(&self) -> &[u8; 32] {
        &self.digest
    }

    pub fn g(&self) -> &G1Affine {
        &self.g
    }

    /// Checks `e(Y_i, g~) = e(g, Y~_i)` for every attribute generator.
    pub fn is_well_formed(&self) -> bool {
        let neg_g = -self.g;
        self.y_g1.iter().zip(&self.y_g2).all(|(y1, y2)| {
            let y2p = G2Prepared::from(*y2);
            let ml = Bls12::multi_miller_loop(&[(y1, &self.g2_prepared), (&neg_g, &y2p)]);
            bool::from(ml.final_exponentiation().is_identity())
        }) && !bool::from(self.g.is_identity())
            && !bool::from(self.g2.is_identity())
    }

    fn check_index(&self, i: usize) -> Result<(), AbcError> {
        if i < self.attr_count() {
            Ok(())
        } else {
            Err(AbcError::IndexOutOfRange(i))
        }
    }
}

impl IssuerSecretKey {
    pub fn attr_count(&self) -> usize {
        self.y.len()
    }
}

impl Wire for IssuerPublicKey {
    fn encode(&self, enc: &mut Encoder) {
        enc.u32(self.attr_count() as u32).g1(&self.g);
        let mut ys = Packer::new();
        for y in &self.y_g1 {
            ys = ys.g1(y);
        }
        enc.field(&ys.into_inner()).g2(&self.g2).g2(&self.x_g2);
        let mut ys = Packer::new();
        for y in &self.y_g2 {
            ys = ys.g2(y);
        }
        enc.field(&ys.into_inner());
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let n = dec.u32()? as usize;
        if n == 0 || n > MAX_ATTRIBUTES {
            return Err(DecodeError::Invalid("attribute count"));
        }
        let g = dec.g1()?;
        let mut r = dec.reader(n * G1_LEN)?;
        let y_g1 = (0..n).map(|_| r.g1()).collect::<Result<Vec<_>, _>>()?;
        let g2 = dec.g2()?;
        let x_g2 = dec.g2()?;
        let mut r = dec.reader(n * crate::crypto::encoding::G2_LEN)?;
        let y_g2 = (0..n).map(|_| r.g2()).collect::<Result<Vec<_>, _>>()?;
        Ok(IssuerPublicKey::new(g, y_g1, g2, x_g2, y_g2))
    }
}

impl Wire for IssuerSecretKey {
    fn encode(&self, enc: &mut Encoder) {
        enc.scalar(&self.x).g1(&self.x_g1).u32(self.y.len() as u32);
        let mut ys = Packer::new();
        for y in &self.y {
            ys = ys.scalar(y);
        }
        enc.field(&ys.into_inner());
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let x = dec.scalar()?;
        let x_g1 = dec.g1()?;
        let n = dec.u32()? as usize;
        if n == 0 || n > MAX_ATTRIBUTES {
            return Err(DecodeError::Invalid("attribute count"));
        }
        let mut r = dec.reader(n * SCALAR_LEN)?;
        let y = (0..n).map(|_| r.scalar()).collect::<Result<Vec<_>, _>>()?;
        Ok(IssuerSecretKey { x, x_g1, y })
    }
}

impl IssuerKeyPair {
    /// True when the secret key matches the public key.
    pub fn is_consistent(&self) -> bool {
        let g = G1Projective::generator();
        let g2 = G2Projective::generator();
        self.sk.attr_count() == self.pk.attr_count()
            && (g * self.sk.x).to_affine() == self.sk.x_g1
            && (g2 * self.sk.x).to_affine() == self.pk.x_g2
            && self
                .sk
                .y
                .iter()
                .zip(&self.pk.y_g1)
                .all(|(y, yg)| (g * y).to_affine() == *yg)
    }
}

impl Wire for IssuerKeyPair {
    fn encode(&self, enc: &mut Encoder) {
        enc.field(&self.sk.to_bytes()).field(&self.pk.to_bytes());
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let sk = IssuerSecretKey::from_bytes(dec.field()?)?;
        let pk = IssuerPublicKey::from_bytes(dec.field()?)?;
        let kp = IssuerKeyPair { sk, pk };
        if !kp.is_consistent() {
            return Err(DecodeError::Invalid("issuer key pair mismatch"));
        }
        Ok(kp)
    }
}

/// Fiat-Shamir proof of knowledge of the opening of an issuance commitment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IssuanceProof {
    challenge: Scalar,
    /// Response for the blinding exponent `t`, then one per hidden index in
    /// ascending order.
    responses: Vec<Scalar>,
}

/// The part of an issuance request that is sent to the issuer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IssueRequest {
    commitment: G1Affine,
    proof: IssuanceProof,
}

/// User-side secrets kept between request and unblinding.
#[derive(Clone)]
pub struct IssuanceState {
    blinding: Scalar,
    hidden: BTreeMap<usize, Scalar>,
}

impl std::fmt::Debug for IssuanceState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IssuanceState")
            .field("hidden_indices", &self.hidden.keys().collect::<Vec<_>>())
            .finish()
    }
}

/// Issuer's blinded signature `(g^u, (X C prod Y_i^{a_i})^u)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlindSignature {
    pub s1: G1Affine,
    pub s2: G1Affine,
}

#[derive(Clone, PartialEq, Eq)]
pub struct Credential {
    s1: G1Affine,
    s2: G1Affine,
    attrs: Vec<Scalar>,
}

impl std::fmt::Debug for Credential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Credential(L={})", self.attrs.len())
    }
}

fn issuance_challenge(
    pk: &IssuerPublicKey,
    hidden: &[usize],
    commitment: &G1Affine,
    announcement: &G1Affine,
) -> Scalar {
    let mut t = Transcript::new(ISSUE_CONTEXT);
    t.append(b"pk", pk.digest());
    let idx: Vec<u8> = hidden
        .iter()
        .flat_map(|i| (*i as u32).to_be_bytes())
        .collect();
    t.append(b"hidden", &idx);
    t.append_g1(b"C", commitment);
    t.append_g1(b"A", announcement);
    t.challenge()
}

fn issuance_bases(pk: &IssuerPublicKey, hidden: &[usize]) -> Vec<G1Projective> {
    std::iter::once(pk.g)
        .chain(hidden.iter().map(|&i| pk.y_g1[i]))
        .map(G1Projective::from)
        .collect()
}

pub fn abc_issue_request<R: RngCore + CryptoRng>(
    pk: &IssuerPublicKey,
    hidden: &BTreeMap<usize, Scalar>,
    rng: &mut R,
) -> Result<(IssueRequest, IssuanceState), AbcError> {
    for &i in hidden.keys() {
        pk.check_index(i)?;
    }
    let indices: Vec<usize> = hidden.keys().copied().collect();
    let bases = issuance_bases(pk, &indices);
    let blinding = random_scalar(rng);
    let witness: Vec<Scalar> = std::iter::once(blinding)
        .chain(hidden.values().copied())
        .collect();
    let nonces: Vec<Scalar> = witness.iter().map(|_| random_scalar(rng)).collect();

    let commitment = G1Projective::multi_exp(&bases, &witness).to_affine();
    let announcement = G1Projective::multi_exp(&bases, &nonces).to_affine();
    let challenge = issuance_challenge(pk, &indices, &commitment, &announcement);
    let responses = nonces
        .iter()
        .zip(&witness)
        .map(|(n, w)| n + challenge * w)
        .collect();

    Ok((
        IssueRequest {
            commitment,
            proof: IssuanceProof {
                challenge,
                responses,
            },
        },
        IssuanceState {
            blinding,
            hidden: hidden.clone(),
        },
    ))
}

impl IssueRequest {
    pub fn commitment(&self) -> &G1Affine {
        &self.commitment
    }

    pub fn hidden_count(&self) -> usize {
        self.proof.responses.len().saturating_sub(1)
    }

    /// Verifies the opening proof for the given hidden index set.
    pub fn verify(&self, pk: &IssuerPublicKey, hidden: &[usize]) -> bool {
        if self.proof.responses.len() != hidden.len() + 1
            || hidden.iter().any(|&i| i >= pk.attr_count())
            || hidden.windows(2).any(|w| w[0] >= w[1])
        {
            return false;
        }
        let mut bases = issuance_bases(pk, hidden);
        bases.push(self.commitment.into());
        let mut exps = self.proof.responses.clone();
        exps.push(-self.proof.challenge);
        let announcement = G1Projective::multi_exp(&bases, &exps).to_affine();
        issuance_challenge(pk, hidden, &self.commitment, &announcement) == self.proof.challenge
    }

    /// Test hook for building tampered requests.
    #[doc(hidden)]
    pub fn with_commitment(&self, commitment: G1Affine) -> Self {
        IssueRequest {
            commitment,
            proof: self.proof.clone(),
        }
    }
}

impl Wire for IssueRequest {
    fn encode(&self, enc: &mut Encoder) {
        enc.g1(&self.commitment);
        let mut p = Packer::new().scalar(&self.proof.challenge);
        for s in &self.proof.responses {
            p = p.scalar(s);
        }
        enc.field(&p.into_inner());
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let commitment = dec.g1()?;
        let body = dec.field()?;
        if body.len() < 2 * SCALAR_LEN
            || body.len() % SCALAR_LEN != 0
            || body.len() > (MAX_ATTRIBUTES + 2) * SCALAR_LEN
        {
            return Err(DecodeError::Invalid("issuance proof length"));
        }
        let mut r = crate::crypto::encoding::Reader::new(body);
        let challenge = r.scalar()?;
        let responses = (1..body.len() / SCALAR_LEN)
            .map(|_| r.scalar())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(IssueRequest {
            commitment,
            proof: IssuanceProof {
                challenge,
                responses,
            },
        })
    }
}

/// Issuer side of issuance. The hidden index set is the complement of
/// `issuer_attrs`; hidden values never reach this function.
pub fn abc_issue_sign<R: RngCore + CryptoRng>(
    sk: &IssuerSecretKey,
    pk: &IssuerPublicKey,
    issuer_attrs: &BTreeMap<usize, Scalar>,
    req: &IssueRequest,
    rng: &mut R,
) -> Result<BlindSignature, AbcError> {
    for &i in issuer_attrs.keys() {
        pk.check_index(i)?;
    }
    let hidden: Vec<usize> = (0..pk.attr_count())
        .filter(|i| !issuer_attrs.contains_key(i))
        .collect();
    if !req.verify(pk, &hidden) {
        return Err(AbcError::InvalidIssuanceProof);
    }
    let u = random_nonzero_scalar(rng);
    let mut acc = G1Projective::from(sk.x_g1) + G1Projective::from(req.commitment);
    if !issuer_attrs.is_empty() {
        let bases: Vec<G1Projective> = issuer_attrs.keys().map(|&i| pk.y_g1[i].into()).collect();
        let exps: Vec<Scalar> = issuer_attrs.values().copied().collect();
        acc += G1Projective::multi_exp(&bases, &exps);
    }
    let s1 = (G1Projective::from(pk.g) * u).to_affine();
    let s2 = (acc * u).to_affine();
    Ok(BlindSignature { s1, s2 })
}

/// Unblinds and verifies. `issuer_attrs` are the values the issuer chose,
/// as delivered alongside the blinded signature.
pub fn abc_issue_unblind(
    pk: &IssuerPublicKey,
    st: &IssuanceState,
    issuer_attrs: &BTreeMap<usize, Scalar>,
    sig: &BlindSignature,
) -> Result<Credential, AbcError> {
    let n = pk.attr_count();
    let mut attrs = Vec::with_capacity(n);
    for i in 0..n {
        match (st.hidden.get(&i), issuer_attrs.get(&i)) {
            (Some(a), None) | (None, Some(a)) => attrs.push(*a),
            _ => return Err(AbcError::IndexPartition),
        }
    }
    if issuer_attrs.keys().any(|&i| i >= n) || st.hidden.keys().any(|&i| i >= n) {
        return Err(AbcError::IndexPartition);
    }
    let s2 = G1Projective::from(sig.s2) - G1Projective::from(sig.s1) * st.blinding;
    let cred = Credential {
        s1: sig.s1,
        s2: s2.to_affine(),
        attrs,
    };
    if cred.verify(pk) {
        Ok(cred)
    } else {
        Err(AbcError::InvalidCredential)
    }
}

impl Credential {
    pub fn attrs(&self) -> &[Scalar] {
        &self.attrs
    }

    /// `e(s1, X~ prod Y~_i^{a_i}) = e(s2, g~)` with `s1` not the identity.
    pub fn verify(&self, pk: &IssuerPublicKey) -> bool {
        if bool::from(self.s1.is_identity()) || self.attrs.len() != pk.attr_count() {
            return false;
        }
        let bases: Vec<G2Projective> = std::iter::once(pk.x_g2)
            .chain(pk.y_g2.iter().copied())
            .map(G2Projective::from)
            .collect();
        let exps: Vec<Scalar> = std::iter::once(Scalar::from(1u64))
            .chain(self.attrs.iter().copied())
            .collect();
        let combined = G2Prepared::from(G2Projective::multi_exp(&bases, &exps).to_affine());
        let neg_s2 = -self.s2;
        let ml = Bls12::multi_miller_loop(&[(&self.s1, &combined), (&neg_s2, &pk.g2_prepared)]);
        bool::from(ml.final_exponentiation().is_identity())
    }
}

impl Wire for Credential {
    fn encode(&self, enc: &mut Encoder) {
        enc.g1(&self.s1).g1(&self.s2).u32(self.attrs.len() as u32);
        let mut p = Packer::new();
        for a in &self.attrs {
            p = p.scalar(a);
        }
        enc.field(&p.into_inner());
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let s1 = dec.g1()?;
        let s2 = dec.g1()?;
        let n = dec.u32()? as usize;
        if n == 0 || n > MAX_ATTRIBUTES {
            return Err(DecodeError::Invalid("attribute count"));
        }
        let mut r = dec.reader(n * SCALAR_LEN)?;
        let attrs = (0..n).map(|_| r.scalar()).collect::<Result<Vec<_>, _>>()?;
        Ok(Credential { s1, s2, attrs })
    }
}

/// Randomized signature `(s1^{r}, (s2 s1^{t})^{r})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomizedSignature {
    pub s1: G1Affine,
    pub s2: G1Affine,
}

/// Prover-side state for the possession relation before the challenge is
/// known. Nonces for hidden attributes may be supplied by the caller so
/// that another relation can reuse them.
pub struct ShowNonces {
    pub sig: RandomizedSignature,
    blinding: Scalar,
    blinding_nonce: Scalar,
    hidden_nonces: BTreeMap<usize, Scalar>,
    pub announcement: Gt,
}

/// Responses of the possession relation for a given challenge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShowResponses {
    pub blinding: Scalar,
    pub hidden: BTreeMap<usize, Scalar>,
}

pub fn show_commit<R: RngCore + CryptoRng>(
    pk: &IssuerPublicKey,
    cred: &Credential,
    hidden_nonces: BTreeMap<usize, Scalar>,
    rng: &mut R,
) -> ShowNonces {
    let r = random_nonzero_scalar(rng);
    let blinding = random_scalar(rng);
    let s1 = G1Projective::from(cred.s1);
    let sig_s1 = s1 * r;
    let sig_s2 = (G1Projective::from(cred.s2) + s1 * blinding) * r;
    let blinding_nonce = random_scalar(rng);

    let bases: Vec<G2Projective> = std::iter::once(pk.g2)
        .chain(hidden_nonces.keys().map(|&i| pk.y_g2[i]))
        .map(G2Projective::from)
        .collect();
    let exps: Vec<Scalar> = std::iter::once(blinding_nonce)
        .chain(hidden_nonces.values().copied())
        .collect();
    let sig_s1 = sig_s1.to_affine();
    let g2_part = G2Projective::multi_exp(&bases, &exps).to_affine();
    let announcement =
        Bls12::multi_miller_loop(&[(&sig_s1, &G2Prepared::from(g2_part))]).final_exponentiation();

    ShowNonces {
        sig: RandomizedSignature {
            s1: sig_s1,
            s2: sig_s2.to_affine(),
        },
        blinding,
        blinding_nonce,
        hidden_nonces,
        announcement,
    }
}

impl ShowNonces {
    pub fn respond(&self, cred: &Credential, challenge: &Scalar) -> ShowResponses {
        ShowResponses {
            blinding: self.blinding_nonce + challenge * self.blinding,
            hidden: self
                .hidden_nonces
                .iter()
                .map(|(&i, n)| (i, n + challenge * cred.attrs[i]))
                .collect(),
        }
    }
}

/// Recomputes the possession announcement from responses. Returns `None`
/// when the randomized signature is degenerate or the index sets do not
/// partition the attribute vector.
pub fn show_recompute(
    pk: &IssuerPublicKey,
    sig: &RandomizedSignature,
    disclosed: &BTreeMap<usize, Scalar>,
    responses: &ShowResponses,
    challenge: &Scalar,
) -> Option<Gt> {
    if bool::from(sig.s1.is_identity()) {
        return None;
    }
    let n = pk.attr_count();
    if disclosed.len() + responses.hidden.len() != n
        || (0..n).any(|i| disclosed.contains_key(&i) == responses.hidden.contains_key(&i))
    {
        return None;
    }
    // e(s1, g~^{s_t} prod_H Y~^{s_i} (X~ prod_D Y~^{a_i})^c) * e(s2^{-c}, g~)
    let mut bases = Vec::with_capacity(n + 2);
    let mut exps = Vec::with_capacity(n + 2);
    bases.push(G2Projective::from(pk.g2));
    exps.push(responses.blinding);
    bases.push(G2Projective::from(pk.x_g2));
    exps.push(*challenge);
    for (&i, s) in &responses.hidden {
        bases.push(pk.y_g2[i].into());
        exps.push(*s);
    }
    for (&i, a) in disclosed {
        bases.push(pk.y_g2[i].into());
        exps.push(challenge * a);
    }
    let g2_part = G2Prepared::from(G2Projective::multi_exp(&bases, &exps).to_affine());
    let s2_part = (G1Projective::from(sig.s2) * (-challenge)).to_affine();
    Some(
        Bls12::multi_miller_loop(&[(&sig.s1, &g2_part), (&s2_part, &pk.g2_prepared)])
            .final_exponentiation(),
    )
}

/// Standalone selective-disclosure proof.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShowProof {
    pub sig: RandomizedSignature,
    pub challenge: Scalar,
    pub responses: ShowResponses,
}

fn show_challenge(
    pk: &IssuerPublicKey,
    sig: &RandomizedSignature,
    disclosed: &BTreeMap<usize, Scalar>,
    announcement: &Gt,
) -> Scalar {
    let mut t = Transcript::new(SHOW_CONTEXT);
    t.append(b"pk", pk.digest());
    let mut d = Vec::new();
    for (i, a) in disclosed {
        d.extend_from_slice(&(*i as u32).to_be_bytes());
        d.extend_from_slice(&a.to_bytes_be());
    }
    t.append(b"disclosed", &d);
    t.append_g1(b"s1", &sig.s1);
    t.append_g1(b"s2", &sig.s2);
    t.append_gt(b"T", announcement);
    t.challenge()
}

/// Shows `cred`, revealing the attributes at `disclosed`.
pub fn abc_show<R: RngCore + CryptoRng>(
    pk: &IssuerPublicKey,
    cred: &Credential,
    disclosed: &[usize],
    rng: &mut R,
) -> Result<(ShowProof, BTreeMap<usize, Scalar>), AbcError> {
    for &i in disclosed {
        pk.check_index(i)?;
    }
    let values: BTreeMap<usize, Scalar> = disclosed.iter().map(|&i| (i, cred.attrs[i])).collect();
    let nonces: BTreeMap<usize, Scalar> = (0..pk.attr_count())
        .filter(|i| !values.contains_key(i))
        .map(|i| (i, random_scalar(rng)))
        .collect();
    let prep = show_commit(pk, cred, nonces, rng);
    let challenge = show_challenge(pk, &prep.sig, &values, &prep.announcement);
    let responses = prep.respond(cred, &challenge);
    Ok((
        ShowProof {
            sig: prep.sig,
            challenge,
            responses,
        },
        values,
    ))
}

pub fn abc_verify_show(
    pk: &IssuerPublicKey,
    proof: &ShowProof,
    disclosed: &BTreeMap<usize, Scalar>,
) -> bool {
    match show_recompute(
        pk,
        &proof.sig,
        disclosed,
        &proof.responses,
        &proof.challenge,
    ) {
        Some(t) => show_challenge(pk, &proof.sig, disclosed, &t) == proof.challenge,
        None => false,
    }
}
