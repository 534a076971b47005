//! Household tag PRF: AES-256-CMAC keyed by the household secret.
//!
//! CMAC yields 16 bytes per call, so the 32-byte tag is two calls with a
//! one-byte block counter prepended to the 8-byte big-endian epoch.

use aes::Aes256;
use cmac::{Cmac, Mac};
use rand_core::{CryptoRng, RngCore};

use super::instrument;

pub const PRF_KEY_LEN: usize = 32;
pub const TAG_LEN: usize = 32;

/// 256-bit household PRF key. Deliberately not `Debug`-printable.
#[derive(Clone, PartialEq, Eq)]
pub struct PrfKey([u8; PRF_KEY_LEN]);

impl std::fmt::Debug for PrfKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("PrfKey(..)")
    }
}

impl PrfKey {
    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        let mut k = [0u8; PRF_KEY_LEN];
        rng.fill_bytes(&mut k);
        PrfKey(k)
    }

    pub fn from_bytes(bytes: [u8; PRF_KEY_LEN]) -> Self {
        PrfKey(bytes)
    }

    pub(crate) fn as_bytes(&self) -> &[u8; PRF_KEY_LEN] {
        &self.0
    }
}

fn cmac(key: &[u8; PRF_KEY_LEN], msg: &[u8]) -> [u8; 16] {
    let mut mac = <Cmac<Aes256> as Mac>::new_from_slice(key).expect("AES-256 key length");
    mac.update(msg);
    mac.finalize().into_bytes().into()
}

pub fn prf_eval(key: &PrfKey, epoch: u64) -> [u8; TAG_LEN] {
    instrument::count_prf();
    let mut block = [0u8; 9];
    block[1..].copy_from_slice(&epoch.to_be_bytes());
    let mut out = [0u8; TAG_LEN];
    block[0] = 0x01;
    out[..16].copy_from_slice(&cmac(&key.0, &block));
    block[0] = 0x02;
    out[16..].copy_from_slice(&cmac(&key.0, &block));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn unhex<const N: usize>(s: &str) -> [u8; N] {
        hex::decode(s).unwrap().try_into().unwrap()
    }

    // AES-256 CMAC examples from NIST SP 800-38B.
    #[test]
    fn cmac_reference_vectors() {
        let key: [u8; 32] =
            unhex("603deb1015ca71be2b73aef0857d77811f352c073b6108d72d9810a30914dff4");
        assert_eq!(
            cmac(&key, b""),
            unhex::<16>("028962f61b7bf89efc6b551f4667d983")
        );
        assert_eq!(
            cmac(&key, &unhex::<16>("6bc1bee22e409f96e93d7e117393172a")),
            unhex::<16>("28a7023f452e8f82bd4bf28d8c37c35c")
        );
    }

    #[test]
    fn tag_is_two_counter_blocks() {
        let key = PrfKey::from_bytes([7u8; 32]);
        let tag = prf_eval(&key, 5);
        let mut m = [0u8; 9];
        m[8] = 5;
        m[0] = 1;
        assert_eq!(tag[..16], cmac(&[7u8; 32], &m));
        m[0] = 2;
        assert_eq!(tag[16..], cmac(&[7u8; 32], &m));
    }

    #[test]
    fn deterministic_and_epoch_separated() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let k = PrfKey::random(&mut rng);
            let a = prf_eval(&k, 41);
            assert_eq!(a, prf_eval(&k, 41));
            assert_ne!(a, prf_eval(&k, 42));
        }
    }

    #[test]
    fn key_debug_is_redacted() {
        assert_eq!(format!("{:?}", PrfKey::from_bytes([1; 32])), "PrfKey(..)");
    }
}
