//! Algebraic building blocks shared by both token systems.

pub mod encoding;
pub mod group;
pub mod instrument;
pub mod pedersen;
pub mod prf;
pub mod sig;

pub use group::{hash_to_group, hash_to_scalar, Transcript};
pub use pedersen::{pc_combine, pc_commit, pc_gen, pc_verify_opening, Commitment, PedersenParams};
pub use prf::{prf_eval, PrfKey};
pub use sig::{
    sig_gen, sig_sign, sig_verify, sig_verify_bytes, SigKeyPair, Signature, SigningKey,
    VerifyingKey,
};
