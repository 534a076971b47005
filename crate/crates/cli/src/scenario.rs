use std::fmt;
use std::path::Path;

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::artifact;
use crate::error::{Result, SimError};

/// Version of the scenario file layout, checked on load.
pub const SCENARIO_FORMAT: u32 = 1;

pub const DEFAULT_BL_SIZES: [usize; 5] = [0, 128, 256, 512, 1024];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Card,
    Phone,
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SystemKind::Card => "card",
            SystemKind::Phone => "phone",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EntitlementDist {
    Fixed {
        value: u32,
    },
    /// Inclusive range.
    Uniform {
        min: u32,
        max: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub format: u32,
    pub system: SystemKind,
    pub households: u32,
    pub cards_per_household: u32,
    pub entitlement: EntitlementDist,
    pub epochs: u32,
    pub revocations_per_epoch: u32,
    pub bench_bl_sizes: Vec<usize>,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn new(system: SystemKind, households: u32, seed: u64) -> Self {
        ScenarioConfig {
            format: SCENARIO_FORMAT,
            system,
            households,
            cards_per_household: 1,
            entitlement: EntitlementDist::Uniform { min: 1, max: 5 },
            epochs: 1,
            revocations_per_epoch: 0,
            bench_bl_sizes: DEFAULT_BL_SIZES.to_vec(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != SCENARIO_FORMAT {
            return Err(SimError::Usage(format!(
                "unsupported scenario format {}",
                self.format
            )));
        }
        if self.cards_per_household == 0 {
            return Err(SimError::Usage(
                "cards per household must be at least 1".into(),
            ));
        }
        if let EntitlementDist::Uniform { min, max } = self.entitlement {
            if min > max {
                return Err(SimError::Usage(format!(
                    "entitlement range {min}..={max} is empty"
                )));
            }
        }
        Ok(())
    }

    /// Entitlement of one household, drawn from the scenario seed.
    pub fn entitlement_of(&self, household: u32) -> u32 {
        match self.entitlement {
            EntitlementDist::Fixed { value } => value,
            EntitlementDist::Uniform { min, max } => {
                rng_for(self.seed, "entitlement", &[u64::from(household)]).gen_range(min..=max)
            }
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = artifact::read_bytes(path)?;
        let scenario: ScenarioConfig =
            serde_json::from_slice(&bytes).map_err(|e| SimError::corrupt(path, e))?;
        if scenario.format != SCENARIO_FORMAT {
            return Err(SimError::Version {
                path: path.to_path_buf(),
                found: u8::try_from(scenario.format).unwrap_or(u8::MAX),
                expected: SCENARIO_FORMAT as u8,
            });
        }
        Ok(scenario)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("scenario serializes");
        text.push('\n');
        artifact::write_bytes(path, text.as_bytes())
    }
}

/// Independent random stream for one labelled step, so every run with the
/// same seed repeats exactly regardless of scheduling.
pub fn rng_for(seed: u64, label: &str, path: &[u64]) -> ChaCha20Rng {
    let mut h = Sha256::new();
    h.update(b"aidsim-rng");
    h.update(seed.to_be_bytes());
    h.update((label.len() as u64).to_be_bytes());
    h.update(label.as_bytes());
    for p in path {
        h.update(p.to_be_bytes());
    }
    ChaCha20Rng::from_seed(h.finalize().into())
}
