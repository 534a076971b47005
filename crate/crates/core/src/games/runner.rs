//! Runs many seeded experiment instances and tallies the results.

use std::fmt;
use std::ops::Range;

use rayon::prelude::*;

use super::{Config, Experiment, Outcome};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialSummary {
    pub experiment: Experiment,
    pub config: Config,
    pub adversary: String,
    pub trials: u64,
    pub wins: u64,
    /// Runs that ended in a guard or oracle refusal.
    pub guards: u64,
    pub seeds: Range<u64>,
}

impl TrialSummary {
    pub const TSV_HEADER: &'static str =
        "experiment\tconfig\tadversary\ttrials\twins\tguards\tseed_start\tseed_end";

    pub fn win_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.wins as f64 / self.trials as f64
        }
    }
}

impl fmt::Display for TrialSummary {
    /// One tab-separated row matching [`TrialSummary::TSV_HEADER`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.experiment.name(),
            self.config.name(),
            self.adversary,
            self.trials,
            self.wins,
            self.guards,
            self.seeds.start,
            self.seeds.end
        )
    }
}

/// Runs `trial` once per seed, in parallel. Each instance is independent
/// and single-threaded, so the tally does not depend on scheduling.
pub fn run_trials<F>(
    experiment: Experiment,
    config: Config,
    adversary: &str,
    seeds: Range<u64>,
    trial: F,
) -> TrialSummary
where
    F: Fn(u64) -> Outcome + Sync,
{
    let outcomes: Vec<Outcome> = seeds.clone().into_par_iter().map(&trial).collect();
    TrialSummary {
        experiment,
        config,
        adversary: adversary.to_string(),
        trials: outcomes.len() as u64,
        wins: outcomes.iter().filter(|o| o.won()).count() as u64,
        guards: outcomes.iter().filter(|&&o| o == Outcome::Guard).count() as u64,
        seeds,
    }
}
