//! Privacy-preserving aid distribution with tokens.

pub mod abc;
pub mod blocklist;
pub mod card;
pub mod crypto;
pub mod games;
pub mod phone;
pub mod protocol;
pub mod showup;
