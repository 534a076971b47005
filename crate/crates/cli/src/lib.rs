//! Simulator for the card and phone aid-distribution systems: drives the
//! four phases in process, persists every artifact, and runs benchmarks
//! and security experiments.

pub mod artifact;
pub mod bench;
pub mod cli;
pub mod error;
pub mod scenario;
pub mod sim;

pub use error::{Result, SimError};
pub use scenario::{rng_for, EntitlementDist, ScenarioConfig, SystemKind};
pub use sim::{AuditReport, DistributionReport, HouseholdReceipts, Layout, Simulation};
