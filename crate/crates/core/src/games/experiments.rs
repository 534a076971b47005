//! The five experiments. Each returns whether the adversary won, or
//! [`Outcome::Guard`] when a trivial-win exclusion or an oracle refusal
//! ends the run with the empty output.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::{Config, GameState, OracleKind, Oracles, UserId};
use crate::blocklist::{Blocklist, BlocklistEntry};
use crate::protocol::{auditor_verify, AidScheme, AuditProof, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Experiment {
    Ind,
    Aud,
    Ent,
    Sec,
    /// Security restricted to revoked malicious users: the station must not
    /// accept anything from a user on its blocklist.
    Rev,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::Ind,
        Experiment::Aud,
        Experiment::Ent,
        Experiment::Sec,
        Experiment::Rev,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Ind => "IND",
            Experiment::Aud => "AUD",
            Experiment::Ent => "ENT",
            Experiment::Sec => "SEC",
            Experiment::Rev => "REV",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name().eq_ignore_ascii_case(s))
    }

    /// Oracles granted to the adversary under `config`.
    pub fn oracles(self, config: Config) -> &'static [OracleKind] {
        use OracleKind::*;
        match (self, config) {
            (Experiment::Ind, _) => &[PrepareReg, FinishReg, Showup],
            (Experiment::Aud, Config::Card) => &[HonestReg, Showup],
            (Experiment::Aud, Config::Phone) => &[HonestReg, MalUserReg, Showup],
            (Experiment::Ent, _) => &[HonestReg, ShowupTwo],
            (Experiment::Sec, Config::Card) => &[HonestReg, Showup, VerifyEnt],
            (Experiment::Sec, Config::Phone) => &[HonestReg, MalUserReg, Showup, VerifyEnt],
            (Experiment::Rev, Config::Card) => &[HonestReg, Showup, VerifyEnt, Revoke],
            (Experiment::Rev, Config::Phone) => &[HonestReg, MalUserReg, Showup, VerifyEnt, Revoke],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Win,
    Lose,
    Guard,
}

impl Outcome {
    pub fn won(self) -> bool {
        self == Outcome::Win
    }

    fn from_bool(win: bool) -> Self {
        if win {
            Outcome::Win
        } else {
            Outcome::Lose
        }
    }
}

/// The adversary's own randomness, independent of the challenger's.
fn adversary_rng(seed: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

pub struct IndChallenge<S: AidScheme> {
    pub id0: UserId,
    pub id1: UserId,
    pub epoch: u64,
    pub blocklist: Blocklist<S::Revocation>,
}

/// Malicious registration and distribution station trying to tell two
/// honest households apart.
pub trait IndAdversary<S: AidScheme> {
    fn name(&self) -> &'static str;
    fn setup(&mut self, params: &SystemParams, rng: &mut ChaCha20Rng) -> S::PublicKey;
    fn choose(&mut self, oracles: &mut Oracles<'_, S>, rng: &mut ChaCha20Rng) -> IndChallenge<S>;
    fn guess(&mut self, output: Option<&S::Showup>, rng: &mut ChaCha20Rng) -> bool;
}

pub fn run_exp_ind<S: AidScheme, A: IndAdversary<S> + ?Sized>(
    params: &Arc<SystemParams>,
    adv: &mut A,
    b: bool,
    seed: u64,
) -> Outcome {
    let mut arng = adversary_rng(seed);
    let pk = adv.setup(params, &mut arng);
    let mut gs = GameState::<S>::with_public_key(Arc::clone(params), pk, seed);
    let allowed = Experiment::Ind.oracles(Config::of::<S>());
    let ch = adv.choose(&mut Oracles::new(&mut gs, allowed), &mut arng);

    let (last0, last1) = (gs.epoch_last(ch.id0), gs.epoch_last(ch.id1));
    if !gs.is_honest(ch.id0) || !gs.is_honest(ch.id1) {
        return Outcome::Guard;
    }
    if gs.entitlement(ch.id0) != gs.entitlement(ch.id1) {
        return Outcome::Guard;
    }
    let revoked = |id| {
        let v = gs
            .revocation(id)
            .expect("honest users have a revocation value");
        ch.blocklist.contains_bytes(&v.entry_bytes())
    };
    if revoked(ch.id0) != revoked(ch.id1) {
        return Outcome::Guard;
    }
    // Exactly one token would still answer at the challenge epoch.
    if (ch.epoch > last0) != (ch.epoch > last1) {
        return Outcome::Guard;
    }

    let id_b = if b { ch.id1 } else { ch.id0 };
    let out = match gs.showup(id_b, ch.epoch, &ch.blocklist) {
        Ok(out) => out,
        Err(_) => return Outcome::Guard,
    };
    Outcome::from_bool(adv.guess(out.as_ref(), &mut arng) == b)
}

pub struct AudClaim<S: AidScheme> {
    pub epoch: u64,
    pub ent_sum: u64,
    pub proof: AuditProof<S>,
    pub blocklist: Blocklist<S::Revocation>,
}

/// Malicious distribution station trying to over-report to the auditor.
pub trait AudAdversary<S: AidScheme> {
    fn name(&self) -> &'static str;
    fn run(&mut self, oracles: &mut Oracles<'_, S>, rng: &mut ChaCha20Rng) -> AudClaim<S>;
}

pub fn run_exp_aud<S: AidScheme, A: AudAdversary<S> + ?Sized>(
    params: &Arc<SystemParams>,
    adv: &mut A,
    seed: u64,
) -> Outcome {
    let mut arng = adversary_rng(seed);
    let mut gs = GameState::<S>::with_honest_rs(Arc::clone(params), seed);
    let allowed = Experiment::Aud.oracles(Config::of::<S>());
    let claim = adv.run(&mut Oracles::new(&mut gs, allowed), &mut arng);
    let valid = auditor_verify::<S>(
        params,
        gs.public_key(),
        claim.epoch,
        claim.ent_sum,
        &claim.proof,
        &claim.blocklist,
    )
    .is_ok();
    let ent_max = gs.ent_sum(claim.epoch) + gs.malicious_entitlement(false);
    Outcome::from_bool(valid && claim.ent_sum > ent_max)
}

/// Auditor trying to learn which of two logs with equal totals it audits.
pub trait EntAdversary<S: AidScheme> {
    fn name(&self) -> &'static str;
    fn choose(&mut self, oracles: &mut Oracles<'_, S>, rng: &mut ChaCha20Rng) -> u64;
    fn guess(&mut self, proof: &AuditProof<S>, rng: &mut ChaCha20Rng) -> bool;
}

pub fn run_exp_ent<S: AidScheme, A: EntAdversary<S> + ?Sized>(
    params: &Arc<SystemParams>,
    adv: &mut A,
    b: bool,
    seed: u64,
) -> Outcome {
    let mut arng = adversary_rng(seed);
    let mut gs = GameState::<S>::with_honest_rs(Arc::clone(params), seed);
    let allowed = Experiment::Ent.oracles(Config::of::<S>());
    let epoch = adv.choose(&mut Oracles::new(&mut gs, allowed), &mut arng);
    let (Ok((sum0, proof0)), Ok((sum1, proof1))) = (
        gs.two_log(0).gen_audit(epoch),
        gs.two_log(1).gen_audit(epoch),
    ) else {
        return Outcome::Guard;
    };
    if sum0 != sum1 || proof0.len() != proof1.len() {
        return Outcome::Guard;
    }
    let proof = if b { &proof1 } else { &proof0 };
    Outcome::from_bool(adv.guess(proof, &mut arng) == b)
}

/// Users trying to collect more than their joint entitlement from an
/// honest station.
pub trait SecAdversary<S: AidScheme> {
    fn name(&self) -> &'static str;
    fn run(&mut self, oracles: &mut Oracles<'_, S>, rng: &mut ChaCha20Rng) -> u64;
}

fn entitlement_seen<S: AidScheme>(gs: &GameState<S>, epoch: u64) -> u64 {
    gs.station_log()
        .records(epoch)
        .iter()
        .map(|r| u64::from(S::showup_ent(&r.showup)))
        .sum()
}

pub fn run_exp_sec<S: AidScheme, A: SecAdversary<S> + ?Sized>(
    params: &Arc<SystemParams>,
    adv: &mut A,
    seed: u64,
) -> Outcome {
    let mut arng = adversary_rng(seed);
    let mut gs = GameState::<S>::with_honest_rs(Arc::clone(params), seed);
    let allowed = Experiment::Sec.oracles(Config::of::<S>());
    let epoch = adv.run(&mut Oracles::new(&mut gs, allowed), &mut arng);
    let ent_max = gs.ent_sum(epoch) + gs.malicious_entitlement(false);
    Outcome::from_bool(entitlement_seen(&gs, epoch) > ent_max)
}

/// As [`run_exp_sec`], but malicious users on the station's blocklist at
/// the end do not count towards what may be handed out.
pub fn run_exp_rev<S: AidScheme, A: SecAdversary<S> + ?Sized>(
    params: &Arc<SystemParams>,
    adv: &mut A,
    seed: u64,
) -> Outcome {
    let mut arng = adversary_rng(seed);
    let mut gs = GameState::<S>::with_honest_rs(Arc::clone(params), seed);
    let allowed = Experiment::Rev.oracles(Config::of::<S>());
    let epoch = adv.run(&mut Oracles::new(&mut gs, allowed), &mut arng);
    let ent_max = gs.ent_sum(epoch) + gs.malicious_entitlement(true);
    Outcome::from_bool(entitlement_seen(&gs, epoch) > ent_max)
}
