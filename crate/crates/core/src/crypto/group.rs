//! Curve plumbing: BLS12-381 types, hashing onto G1, and Fiat-Shamir
//! transcripts.

pub use blstrs::{Bls12, G1Affine, G1Projective, G2Affine, G2Prepared, G2Projective, Gt, Scalar};

use ff::Field;
use group::{Curve, Group};
use rand_core::{CryptoRng, RngCore};
use sha2::{Digest, Sha512};

/// Hash-to-curve onto G1 (RFC 9380 SSWU, as implemented by blst).
pub fn hash_to_group(domain: &[u8], msg: &[u8]) -> G1Projective {
    assert!(!domain.is_empty(), "hash_to_group needs a domain tag");
    G1Projective::hash_to_curve(msg, domain, b"")
}

/// Reduces 64 uniform bytes into a scalar.
///
/// The input is split into 31-byte little-endian limbs, each of which is
/// below the group order, and recombined with powers of 2^248.
pub fn scalar_from_wide(bytes: &[u8; 64]) -> Scalar {
    let shift = {
        let mut s = Scalar::ONE;
        for _ in 0..248 {
            s = s.double();
        }
        s
    };
    let mut acc = Scalar::ZERO;
    for chunk in bytes.chunks(31).rev() {
        let mut limb = [0u8; 32];
        limb[..chunk.len()].copy_from_slice(chunk);
        let limb = Option::<Scalar>::from(Scalar::from_bytes_le(&limb)).expect("248-bit limb");
        acc = acc * shift + limb;
    }
    acc
}

/// Hashes `msg` to a scalar under a domain tag.
pub fn hash_to_scalar(domain: &[u8], msg: &[u8]) -> Scalar {
    let mut t = Transcript::new(domain);
    t.append(b"msg", msg);
    t.challenge()
}

pub fn random_scalar<R: RngCore + CryptoRng>(rng: &mut R) -> Scalar {
    Scalar::random(rng)
}

pub fn random_nonzero_scalar<R: RngCore + CryptoRng>(rng: &mut R) -> Scalar {
    loop {
        let s = Scalar::random(&mut *rng);
        if !bool::from(s.is_zero()) {
            return s;
        }
    }
}

pub fn is_identity(p: &G1Projective) -> bool {
    bool::from(p.is_identity())
}

pub fn g1_bytes(p: &G1Projective) -> [u8; 48] {
    p.to_affine().to_compressed()
}

/// Fiat-Shamir transcript over SHA-512. Every appended item carries its
/// label and length so distinct item sequences never collide.
#[derive(Clone)]
pub struct Transcript {
    hasher: Sha512,
}

impl Transcript {
    pub fn new(context: &[u8]) -> Self {
        let mut t = Transcript {
            hasher: Sha512::new(),
        };
        t.append(b"context", context);
        t
    }

    pub fn append(&mut self, label: &[u8], data: &[u8]) -> &mut Self {
        self.hasher.update((label.len() as u32).to_be_bytes());
        self.hasher.update(label);
        self.hasher.update((data.len() as u64).to_be_bytes());
        self.hasher.update(data);
        self
    }

    pub fn append_u64(&mut self, label: &[u8], v: u64) -> &mut Self {
        self.append(label, &v.to_be_bytes())
    }

    pub fn append_g1(&mut self, label: &[u8], p: &G1Affine) -> &mut Self {
        self.append(label, &p.to_compressed())
    }

    pub fn append_g1s(&mut self, label: &[u8], ps: &[G1Affine]) -> &mut Self {
        self.append_u64(label, ps.len() as u64);
        for p in ps {
            self.hasher.update(p.to_compressed());
        }
        self
    }

    pub fn append_gt(&mut self, label: &[u8], v: &Gt) -> &mut Self {
        use blstrs::Compress;
        let mut buf = Vec::with_capacity(288);
        v.write_compressed(&mut buf).expect("writing to a Vec");
        self.append(label, &buf)
    }

    pub fn challenge(self) -> Scalar {
        let out: [u8; 64] = self.hasher.finalize().into();
        scalar_from_wide(&out)
    }
}

/// Normalises a batch of projective points with one shared inversion.
pub fn normalize(points: &[G1Projective]) -> Vec<G1Affine> {
    let mut out = vec![G1Affine::default(); points.len()];
    G1Projective::batch_normalize(points, &mut out);
    out
}

/// Precomputed multiples of a fixed G1 base: one row of `2^w - 1` entries
/// per `w`-bit digit of the scalar, so a multiplication is at most
/// `ceil(256 / w)` mixed additions.
#[derive(Clone)]
pub struct FixedBase {
    base: G1Affine,
    bits: usize,
    windows: Vec<Vec<G1Affine>>,
}

impl std::fmt::Debug for FixedBase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FixedBase")
            .field("base", &self.base)
            .field("bits", &self.bits)
            .finish()
    }
}

impl FixedBase {
    /// 8-bit windows; about 0.8 MB per base.
    pub fn new(base: &G1Projective) -> Self {
        Self::with_window(base, 8)
    }

    /// `bits` must be 4 or 8.
    pub fn with_window(base: &G1Projective, bits: usize) -> Self {
        assert!(bits == 4 || bits == 8, "window must be 4 or 8 bits");
        let per_row = (1usize << bits) - 1;
        let rows = 256 / bits;
        let mut points = Vec::with_capacity(rows * per_row);
        let mut step = *base;
        for _ in 0..rows {
            let mut acc = step;
            for _ in 0..per_row {
                points.push(acc);
                acc += step;
            }
            step = acc;
        }
        let affine = normalize(&points);
        FixedBase {
            base: base.to_affine(),
            bits,
            windows: affine.chunks(per_row).map(<[G1Affine]>::to_vec).collect(),
        }
    }

    pub fn base(&self) -> &G1Affine {
        &self.base
    }

    pub fn mul(&self, s: &Scalar) -> G1Projective {
        let mut acc = G1Projective::identity();
        let bytes = s.to_bytes_le();
        if self.bits == 8 {
            for (row, &b) in self.windows.iter().zip(bytes.iter()) {
                if b != 0 {
                    acc += &row[b as usize - 1];
                }
            }
        } else {
            for (i, &b) in bytes.iter().enumerate() {
                for (k, d) in [b & 0x0f, b >> 4].into_iter().enumerate() {
                    if d != 0 {
                        acc += &self.windows[2 * i + k][d as usize - 1];
                    }
                }
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ff::PrimeField;

    #[test]
    fn hash_to_group_deterministic_and_in_subgroup() {
        let a = hash_to_group(b"tag-v1", &1u64.to_be_bytes());
        let b = hash_to_group(b"tag-v1", &1u64.to_be_bytes());
        let c = hash_to_group(b"tag-v1", &2u64.to_be_bytes());
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(!is_identity(&a));
        // q-th power is the identity: multiply by (q-1) and add once more.
        let q_minus_one = -Scalar::ONE;
        assert!(is_identity(&(a * q_minus_one + a)));
        assert!(bool::from(a.to_affine().is_torsion_free()));
    }

    #[test]
    #[should_panic]
    fn hash_to_group_rejects_empty_domain() {
        let _ = hash_to_group(b"", b"x");
    }

    #[test]
    fn wide_reduction_matches_integer_arithmetic() {
        // 2^256 + 5 reduced mod q, computed independently as (2^128)^2 + 5.
        let mut bytes = [0u8; 64];
        bytes[0] = 5;
        bytes[32] = 1;
        let two_128 = Scalar::from_u128(1u128 << 127) * Scalar::from(2u64);
        assert_eq!(
            scalar_from_wide(&bytes),
            two_128 * two_128 + Scalar::from(5u64)
        );
        assert_eq!(scalar_from_wide(&[0u8; 64]), Scalar::ZERO);
        let mut top = [0u8; 64];
        top[63] = 0x80;
        // 2^511
        let mut expect = Scalar::ONE;
        for _ in 0..511 {
            expect = expect.double();
        }
        assert_eq!(scalar_from_wide(&top), expect);
    }

    #[test]
    fn fixed_base_matches_plain_multiplication() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(1);
        let base = hash_to_group(b"fixed-base-test", b"");
        for table in [FixedBase::new(&base), FixedBase::with_window(&base, 4)] {
            for s in [
                Scalar::ZERO,
                Scalar::ONE,
                -Scalar::ONE,
                Scalar::from(256u64),
            ] {
                assert_eq!(table.mul(&s), base * s);
            }
            for _ in 0..50 {
                let s = random_scalar(&mut rng);
                assert_eq!(table.mul(&s), base * s);
            }
        }
    }

    #[test]
    fn transcript_separates_labels() {
        let mut a = Transcript::new(b"ctx");
        a.append(b"ab", b"c");
        let mut b = Transcript::new(b"ctx");
        b.append(b"a", b"bc");
        assert_ne!(a.challenge(), b.challenge());
    }
}
