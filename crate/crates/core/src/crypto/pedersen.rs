//! Pedersen commitments `c = g^m h^r` over any prime-order group.
//!
//! Production parameters live in G1 with `h` obtained by hashing onto the
//! curve, so nobody knows `log_g(h)`. A small modular group is provided for
//! hand-checkable test vectors.

use std::fmt::Debug;
use std::sync::Arc;

use blstrs::{G1Projective, Scalar};
use ff::Field;
use group::Group;
use thiserror::Error;

use super::group::{hash_to_group, FixedBase};
use super::instrument;

pub const PEDERSEN_H_DOMAIN: &[u8] = b"pedersen-h-v1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParamsError {
    #[error("unsupported security level {0} (only 128 is provided)")]
    SecurityLevel(u32),
    #[error("invalid group description: {0}")]
    Group(&'static str),
}

/// Minimal group interface the commitment scheme needs.
pub trait PrimeOrderGroup: Clone + Debug {
    type Elem: Clone + PartialEq + Debug;
    type Scalar: Clone + PartialEq + Debug;
    /// Precomputation for repeated exponentiation of one base.
    type Table: Clone + Debug;

    fn identity(&self) -> Self::Elem;
    fn op(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn pow(&self, base: &Self::Elem, e: &Self::Scalar) -> Self::Elem;
    fn scalar_zero(&self) -> Self::Scalar;
    fn scalar_add(&self, a: &Self::Scalar, b: &Self::Scalar) -> Self::Scalar;
    fn table(&self, base: &Self::Elem) -> Self::Table;
    fn pow_table(&self, table: &Self::Table, e: &Self::Scalar) -> Self::Elem;
}

/// The prime-order group G1 of BLS12-381.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Bls12G1;

impl PrimeOrderGroup for Bls12G1 {
    type Elem = G1Projective;
    type Scalar = Scalar;
    type Table = Arc<FixedBase>;

    fn identity(&self) -> G1Projective {
        G1Projective::identity()
    }

    fn op(&self, a: &G1Projective, b: &G1Projective) -> G1Projective {
        a + b
    }

    fn pow(&self, base: &G1Projective, e: &Scalar) -> G1Projective {
        base * e
    }

    fn scalar_zero(&self) -> Scalar {
        Scalar::ZERO
    }

    fn scalar_add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        a + b
    }

    fn table(&self, base: &G1Projective) -> Arc<FixedBase> {
        Arc::new(FixedBase::new(base))
    }

    fn pow_table(&self, table: &Arc<FixedBase>, e: &Scalar) -> G1Projective {
        table.mul(e)
    }
}

/// Order-`q` subgroup of `Z_p^*`. Test-sized only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModularSubgroup {
    p: u64,
    q: u64,
}

impl ModularSubgroup {
    pub fn new(p: u64, q: u64) -> Result<Self, ParamsError> {
        if !is_prime(p) || !is_prime(q) {
            return Err(ParamsError::Group("p and q must be prime"));
        }
        if !(p - 1).is_multiple_of(q) {
            return Err(ParamsError::Group("q must divide p - 1"));
        }
        Ok(ModularSubgroup { p, q })
    }

    pub fn order(&self) -> u64 {
        self.q
    }

    fn contains_generator(&self, x: u64) -> bool {
        !x.is_multiple_of(self.p) && x % self.p != 1 && self.pow(&(x % self.p), &self.q) == 1
    }
}

impl PrimeOrderGroup for ModularSubgroup {
    type Elem = u64;
    type Scalar = u64;
    type Table = u64;

    fn identity(&self) -> u64 {
        1
    }

    fn op(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.p as u128) as u64
    }

    fn pow(&self, base: &u64, e: &u64) -> u64 {
        let (mut acc, mut b, mut e) = (1u64, *base % self.p, *e);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.op(&acc, &b);
            }
            b = self.op(&b, &b);
            e >>= 1;
        }
        acc
    }

    fn scalar_zero(&self) -> u64 {
        0
    }

    fn scalar_add(&self, a: &u64, b: &u64) -> u64 {
        (a + b) % self.q
    }

    fn table(&self, base: &u64) -> u64 {
        *base
    }

    fn pow_table(&self, table: &u64, e: &u64) -> u64 {
        self.pow(table, e)
    }
}

fn is_prime(n: u64) -> bool {
    n >= 2
        && (2..)
            .take_while(|d| d * d <= n)
            .all(|d| !n.is_multiple_of(d))
}

#[derive(Debug, Clone)]
pub struct PedersenParams<G: PrimeOrderGroup = Bls12G1> {
    group: G,
    g: G::Elem,
    h: G::Elem,
    g_table: G::Table,
    h_table: G::Table,
}

impl<G: PrimeOrderGroup + PartialEq> PartialEq for PedersenParams<G> {
    fn eq(&self, other: &Self) -> bool {
        self.group == other.group && self.g == other.g && self.h == other.h
    }
}

/// A commitment value; its opening `(m, r)` is held by whoever made it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Commitment<E = G1Projective>(pub E);

/// Production parameters in G1. `seed` is the domain-separation input for
/// deriving `h`; the same seed always yields the same parameters.
pub fn pc_gen(security_level: u32, seed: &[u8]) -> Result<PedersenParams<Bls12G1>, ParamsError> {
    if security_level != 128 {
        return Err(ParamsError::SecurityLevel(security_level));
    }
    let h = hash_to_group(PEDERSEN_H_DOMAIN, seed);
    Ok(PedersenParams::from_generators(
        Bls12G1,
        G1Projective::generator(),
        h,
    ))
}

impl PedersenParams<ModularSubgroup> {
    /// Relaxed constructor for small test groups. `h` may have a known
    /// discrete log, which is fine for arithmetic checks and nothing else.
    pub fn toy(p: u64, q: u64, g: u64, h: u64) -> Result<Self, ParamsError> {
        let group = ModularSubgroup::new(p, q)?;
        if !group.contains_generator(g) || !group.contains_generator(h) {
            return Err(ParamsError::Group(
                "g and h must generate the order-q subgroup",
            ));
        }
        Ok(PedersenParams::from_generators(group, g, h))
    }
}

impl<G: PrimeOrderGroup> PedersenParams<G> {
    fn from_generators(group: G, g: G::Elem, h: G::Elem) -> Self {
        let g_table = group.table(&g);
        let h_table = group.table(&h);
        PedersenParams {
            group,
            g,
            h,
            g_table,
            h_table,
        }
    }

    pub fn g_table(&self) -> &G::Table {
        &self.g_table
    }

    pub fn h_table(&self) -> &G::Table {
        &self.h_table
    }

    pub fn group(&self) -> &G {
        &self.group
    }

    pub fn g(&self) -> &G::Elem {
        &self.g
    }

    pub fn h(&self) -> &G::Elem {
        &self.h
    }

    pub fn commit(&self, m: &G::Scalar, r: &G::Scalar) -> Commitment<G::Elem> {
        instrument::count_fixed_base_exp(2);
        let gm = self.group.pow_table(&self.g_table, m);
        let hr = self.group.pow_table(&self.h_table, r);
        Commitment(self.group.op(&gm, &hr))
    }

    pub fn verify_opening(&self, c: &Commitment<G::Elem>, m: &G::Scalar, r: &G::Scalar) -> bool {
        let gm = self.group.pow_table(&self.g_table, m);
        let hr = self.group.pow_table(&self.h_table, r);
        self.group.op(&gm, &hr) == c.0
    }

    /// Group product of all commitments; the empty product is the identity.
    pub fn combine<'a, I>(&self, cs: I) -> Commitment<G::Elem>
    where
        I: IntoIterator<Item = &'a Commitment<G::Elem>>,
        G::Elem: 'a,
    {
        Commitment(
            cs.into_iter()
                .fold(self.group.identity(), |acc, c| self.group.op(&acc, &c.0)),
        )
    }

    pub fn sum_openings<'a, I>(&self, rs: I) -> G::Scalar
    where
        I: IntoIterator<Item = &'a G::Scalar>,
        G::Scalar: 'a,
    {
        rs.into_iter().fold(self.group.scalar_zero(), |acc, r| {
            self.group.scalar_add(&acc, r)
        })
    }
}

pub fn pc_commit<G: PrimeOrderGroup>(
    params: &PedersenParams<G>,
    m: &G::Scalar,
    r: &G::Scalar,
) -> Commitment<G::Elem> {
    params.commit(m, r)
}

pub fn pc_verify_opening<G: PrimeOrderGroup>(
    params: &PedersenParams<G>,
    c: &Commitment<G::Elem>,
    m: &G::Scalar,
    r: &G::Scalar,
) -> bool {
    params.verify_opening(c, m, r)
}

pub fn pc_combine<G: PrimeOrderGroup>(
    params: &PedersenParams<G>,
    cs: &[Commitment<G::Elem>],
) -> Commitment<G::Elem> {
    params.combine(cs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::group::random_scalar;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    // Independent oracle: naive repeated multiplication mod p.
    fn naive_pow(b: u64, e: u64, p: u64) -> u64 {
        (0..e).fold(1, |acc, _| acc * b % p)
    }

    fn toy() -> PedersenParams<ModularSubgroup> {
        PedersenParams::toy(23, 11, 4, 18).unwrap()
    }

    #[test]
    fn toy_group_accepts_h_equal_g_cubed() {
        assert_eq!(naive_pow(4, 3, 23), 18);
        assert!(PedersenParams::toy(23, 11, 4, 18).is_ok());
        // 5 has order 22, not 11.
        assert!(PedersenParams::toy(23, 11, 5, 18).is_err());
        assert!(PedersenParams::toy(23, 7, 4, 18).is_err());
        assert!(PedersenParams::toy(21, 5, 4, 18).is_err());
    }

    #[test]
    fn toy_commit_matches_modexp_oracle() {
        let expected = naive_pow(4, 2, 23) * naive_pow(18, 5, 23) % 23;
        assert_eq!(expected, 2);
        assert_eq!(pc_commit(&toy(), &2, &5), Commitment(2));
    }

    #[test]
    fn zero_opening_is_identity() {
        assert_eq!(pc_commit(&toy(), &0, &0), Commitment(1));
        let params = pc_gen(128, b"test-v1").unwrap();
        let c = pc_commit(&params, &Scalar::ZERO, &Scalar::ZERO);
        assert!(bool::from(c.0.is_identity()));
    }

    #[test]
    fn toy_homomorphism() {
        let p = toy();
        let lhs = p.combine(&[pc_commit(&p, &2, &3), pc_commit(&p, &5, &7)]);
        assert_eq!(lhs, pc_commit(&p, &7, &10));
    }

    #[test]
    fn generation_is_deterministic_and_h_is_fresh() {
        let a = pc_gen(128, b"test-v1").unwrap();
        let b = pc_gen(128, b"test-v1").unwrap();
        assert_eq!(a, b);
        assert_ne!(a.g(), a.h());
        assert!(!bool::from(a.h().is_identity()));
        assert_ne!(pc_gen(128, b"test-v2").unwrap().h(), a.h());
        assert_eq!(
            pc_gen(80, b"x").unwrap_err(),
            ParamsError::SecurityLevel(80)
        );
    }

    #[test]
    fn binding_and_round_trip() {
        let params = pc_gen(128, b"test-v1").unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let m = random_scalar(&mut rng);
        let r = random_scalar(&mut rng);
        let c = pc_commit(&params, &m, &r);
        assert!(pc_verify_opening(&params, &c, &m, &r));
        assert!(!pc_verify_opening(&params, &c, &(m + Scalar::ONE), &r));
        assert!(!pc_verify_opening(&params, &c, &m, &(r + Scalar::ONE)));
    }

    #[test]
    fn combine_edge_cases() {
        let params = pc_gen(128, b"test-v1").unwrap();
        assert!(bool::from(pc_combine(&params, &[]).0.is_identity()));
        let c = pc_commit(&params, &Scalar::from(3u64), &Scalar::from(4u64));
        assert_eq!(pc_combine(&params, &[c]), c);
    }

    #[test]
    fn ten_random_openings_sum() {
        let params = pc_gen(128, b"test-v1").unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let openings: Vec<(Scalar, Scalar)> = (0..10)
            .map(|_| (random_scalar(&mut rng), random_scalar(&mut rng)))
            .collect();
        let cs: Vec<_> = openings
            .iter()
            .map(|(m, r)| pc_commit(&params, m, r))
            .collect();
        // Oracle: plain field sums of the openings.
        let (msum, rsum) = openings
            .iter()
            .fold((Scalar::ZERO, Scalar::ZERO), |(a, b), (m, r)| {
                (a + m, b + r)
            });
        assert!(pc_verify_opening(
            &params,
            &pc_combine(&params, &cs),
            &msum,
            &rsum
        ));
    }

    #[test]
    fn hiding_fresh_randomness_gives_distinct_commitments() {
        let params = pc_gen(128, b"test-v1").unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let m = Scalar::from(5u64);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..10_000 {
            let r = random_scalar(&mut rng);
            let c = pc_commit(&params, &m, &r);
            assert!(seen.insert(crate::crypto::group::g1_bytes(&c.0)));
        }
    }

    proptest! {
        #[test]
        fn toy_combine_opens_to_sums(openings in proptest::collection::vec((0u64..11, 0u64..11), 0..20)) {
            let p = toy();
            let cs: Vec<_> = openings.iter().map(|(m, r)| pc_commit(&p, m, r)).collect();
            let m: u64 = openings.iter().map(|o| o.0).sum::<u64>() % 11;
            let r: u64 = openings.iter().map(|o| o.1).sum::<u64>() % 11;
            prop_assert!(pc_verify_opening(&p, &pc_combine(&p, &cs), &m, &r));
        }
    }
}
