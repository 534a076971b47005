//! BLS signatures with signatures in G1 and keys in G2. Signing is
//! deterministic, so a seeded run reproduces every signature byte.

use blstrs::{Bls12, G1Affine, G2Affine, G2Prepared, G2Projective, Scalar};
use group::{prime::PrimeCurveAffine, Curve, Group};
use pairing::{MillerLoopResult, MultiMillerLoop};
use rand_core::{CryptoRng, RngCore};

use super::encoding::{
    g1_from_bytes, g2_from_bytes, scalar_from_be, DecodeError, Decoder, Encoder, Wire, G1_LEN,
    G2_LEN,
};
use super::group::{hash_to_group, random_nonzero_scalar};
use super::instrument;

pub const SIG_DOMAIN: &[u8] = b"BLS_SIG_BLS12381G1_XMD:SHA-256_SSWU_RO_NUL_";
pub const SIGNATURE_LEN: usize = G1_LEN;

#[derive(Clone, PartialEq, Eq)]
pub struct SigningKey(Scalar);

impl std::fmt::Debug for SigningKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SigningKey(..)")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyingKey(G2Affine);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature(G1Affine);

#[derive(Debug, Clone)]
pub struct SigKeyPair {
    pub sk: SigningKey,
    pub pk: VerifyingKey,
}

pub fn sig_gen<R: RngCore + CryptoRng>(rng: &mut R) -> SigKeyPair {
    let sk = SigningKey(random_nonzero_scalar(rng));
    let pk = sk.verifying_key();
    SigKeyPair { sk, pk }
}

pub fn sig_sign(sk: &SigningKey, msg: &[u8]) -> Signature {
    instrument::count_sign();
    Signature((hash_to_group(SIG_DOMAIN, msg) * sk.0).to_affine())
}

pub fn sig_verify(pk: &VerifyingKey, msg: &[u8], sig: &Signature) -> bool {
    if bool::from(sig.0.is_identity()) || bool::from(pk.0.is_identity()) {
        return false;
    }
    let hm = hash_to_group(SIG_DOMAIN, msg).to_affine();
    let neg_g2 = G2Prepared::from(-G2Affine::generator());
    let pk_prep = G2Prepared::from(pk.0);
    let ml = Bls12::multi_miller_loop(&[(&sig.0, &neg_g2), (&hm, &pk_prep)]);
    bool::from(ml.final_exponentiation().is_identity())
}

/// Verifies a signature given as raw bytes; malformed encodings are rejected
/// rather than reported as errors.
pub fn sig_verify_bytes(pk: &VerifyingKey, msg: &[u8], sig: &[u8]) -> bool {
    match <[u8; SIGNATURE_LEN]>::try_from(sig).map(|b| Signature::from_bytes(&b)) {
        Ok(Ok(s)) => sig_verify(pk, msg, &s),
        _ => false,
    }
}

impl SigningKey {
    pub fn verifying_key(&self) -> VerifyingKey {
        VerifyingKey((G2Projective::generator() * self.0).to_affine())
    }

    pub fn to_bytes(&self) -> [u8; 32] {
        self.0.to_bytes_be()
    }

    pub fn from_bytes(bytes: &[u8; 32]) -> Result<Self, DecodeError> {
        let s = scalar_from_be(bytes)?;
        if bool::from(ff::Field::is_zero(&s)) {
            return Err(DecodeError::Invalid("zero signing key"));
        }
        Ok(SigningKey(s))
    }
}

impl VerifyingKey {
    pub fn to_bytes(&self) -> [u8; G2_LEN] {
        self.0.to_compressed()
    }

    pub fn from_bytes(bytes: &[u8; G2_LEN]) -> Result<Self, DecodeError> {
        let p = g2_from_bytes(bytes)?;
        if bool::from(p.is_identity()) {
            return Err(DecodeError::Point);
        }
        Ok(VerifyingKey(p))
    }
}

impl Signature {
    pub fn to_bytes(&self) -> [u8; SIGNATURE_LEN] {
        self.0.to_compressed()
    }

    pub fn from_bytes(bytes: &[u8; SIGNATURE_LEN]) -> Result<Self, DecodeError> {
        Ok(Signature(g1_from_bytes(bytes)?))
    }
}

impl Wire for VerifyingKey {
    fn encode(&self, enc: &mut Encoder) {
        enc.field(&self.to_bytes());
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        VerifyingKey::from_bytes(&dec.fixed()?)
    }
}

impl Wire for SigKeyPair {
    fn encode(&self, enc: &mut Encoder) {
        enc.field(&self.sk.to_bytes()).field(&self.pk.to_bytes());
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let sk = SigningKey::from_bytes(&dec.fixed()?)?;
        let pk = VerifyingKey::from_bytes(&dec.fixed()?)?;
        if sk.verifying_key() != pk {
            return Err(DecodeError::Invalid("key pair mismatch"));
        }
        Ok(SigKeyPair { sk, pk })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn sign_verify_round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let kp = sig_gen(&mut rng);
        let s = sig_sign(&kp.sk, b"hello");
        assert!(sig_verify(&kp.pk, b"hello", &s));
        assert!(!sig_verify(&kp.pk, b"hellp", &s));
        assert_eq!(s, sig_sign(&kp.sk, b"hello"));
        let other = sig_gen(&mut rng);
        assert!(!sig_verify(&other.pk, b"hello", &s));
    }

    #[test]
    fn key_round_trips() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let kp = sig_gen(&mut rng);
        assert_eq!(SigningKey::from_bytes(&kp.sk.to_bytes()).unwrap(), kp.sk);
        assert_eq!(VerifyingKey::from_bytes(&kp.pk.to_bytes()).unwrap(), kp.pk);
        assert!(SigningKey::from_bytes(&[0; 32]).is_err());
    }

    #[test]
    fn malformed_bytes_are_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let kp = sig_gen(&mut rng);
        assert!(!sig_verify_bytes(&kp.pk, b"m", &[]));
        assert!(!sig_verify_bytes(&kp.pk, b"m", &[0xff; 48]));
        assert!(!sig_verify_bytes(&kp.pk, b"m", &[0u8; 47]));
        // Compressed identity encoding.
        let mut id = [0u8; 48];
        id[0] = 0xc0;
        assert!(!sig_verify_bytes(&kp.pk, b"m", &id));
    }

    #[test]
    fn every_single_bit_flip_is_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let kp = sig_gen(&mut rng);
        for trial in 0..1000u32 {
            let msg = trial.to_be_bytes();
            let good = sig_sign(&kp.sk, &msg).to_bytes();
            let mut bad = good;
            let bit = rng.gen_range(0..SIGNATURE_LEN * 8);
            bad[bit / 8] ^= 1 << (bit % 8);
            assert!(
                !sig_verify_bytes(&kp.pk, &msg, &bad),
                "trial {trial} bit {bit}"
            );
        }
    }
}
