//! Security and privacy experiments as executable games.
//!
//! A [`GameState`] holds the challenger's bookkeeping. Adversaries only see
//! an [`Oracles`] handle, which exposes the oracles the experiment grants.

mod experiments;
pub mod kit;
mod runner;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::blocklist::{Blocklist, BlocklistEntry};
use crate::protocol::{AidScheme, InsertOutcome, ProtocolError, SystemParams, TransactionLog};

pub use experiments::{
    run_exp_aud, run_exp_ent, run_exp_ind, run_exp_rev, run_exp_sec, AudAdversary, AudClaim,
    EntAdversary, Experiment, IndAdversary, IndChallenge, Outcome, SecAdversary,
};
pub use runner::{run_trials, TrialSummary};

pub type UserId = u32;

/// Which token system the game models. Cards are tamper-resistant, so the
/// card configuration withholds the malicious-user registration oracle from
/// the auditability and security games.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Config {
    Card,
    Phone,
}

impl Config {
    pub fn of<S: AidScheme>() -> Self {
        if S::NAME == "card" {
            Config::Card
        } else {
            Config::Phone
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Config::Card => "card",
            Config::Phone => "phone",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OracleKind {
    HonestReg,
    MalUserReg,
    PrepareReg,
    FinishReg,
    Showup,
    ShowupTwo,
    VerifyEnt,
    Revoke,
}

/// An oracle answering with the empty output.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle {0:?} is not available in this experiment")]
    Unavailable(OracleKind),
    #[error("guard rejected the query")]
    Rejected,
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// Challenger state shared by all experiments.
pub struct GameState<S: AidScheme> {
    params: Arc<SystemParams>,
    rs: Option<S::RsKey>,
    pk: S::PublicKey,
    rng: ChaCha20Rng,
    tokens: HashMap<UserId, S::Token>,
    honest: BTreeSet<UserId>,
    malicious: BTreeSet<UserId>,
    pre: BTreeSet<UserId>,
    ent: HashMap<UserId, u32>,
    rev: HashMap<UserId, S::Revocation>,
    eps_last: HashMap<UserId, u64>,
    ent_sum: BTreeMap<u64, u64>,
    log: BTreeMap<u64, Vec<S::Showup>>,
    two_logs: [TransactionLog<S>; 2],
    ds_log: TransactionLog<S>,
    ds_bl: Blocklist<S::Revocation>,
    ds_frozen: bool,
    verify_calls: usize,
}

impl<S: AidScheme> GameState<S> {
    /// Honest registration station drawn from `seed`.
    pub fn with_honest_rs(params: Arc<SystemParams>, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let rs = S::setup_rs(&mut rng);
        let pk = S::public_key(&rs);
        Self::build(params, Some(rs), pk, rng)
    }

    /// Registration station key chosen by the adversary.
    pub fn with_public_key(params: Arc<SystemParams>, pk: S::PublicKey, seed: u64) -> Self {
        Self::build(params, None, pk, ChaCha20Rng::seed_from_u64(seed))
    }

    fn build(
        params: Arc<SystemParams>,
        rs: Option<S::RsKey>,
        pk: S::PublicKey,
        rng: ChaCha20Rng,
    ) -> Self {
        GameState {
            params,
            rs,
            pk,
            rng,
            tokens: HashMap::new(),
            honest: BTreeSet::new(),
            malicious: BTreeSet::new(),
            pre: BTreeSet::new(),
            ent: HashMap::new(),
            rev: HashMap::new(),
            eps_last: HashMap::new(),
            ent_sum: BTreeMap::new(),
            log: BTreeMap::new(),
            two_logs: [TransactionLog::new(), TransactionLog::new()],
            ds_log: TransactionLog::new(),
            ds_bl: Blocklist::new(),
            ds_frozen: false,
            verify_calls: 0,
        }
    }

    pub fn params(&self) -> &Arc<SystemParams> {
        &self.params
    }

    pub fn public_key(&self) -> &S::PublicKey {
        &self.pk
    }

    pub fn is_honest(&self, id: UserId) -> bool {
        self.honest.contains(&id)
    }

    pub fn is_malicious(&self, id: UserId) -> bool {
        self.malicious.contains(&id)
    }

    pub fn entitlement(&self, id: UserId) -> Option<u32> {
        self.ent.get(&id).copied()
    }

    pub fn revocation(&self, id: UserId) -> Option<&S::Revocation> {
        self.rev.get(&id)
    }

    pub fn epoch_last(&self, id: UserId) -> u64 {
        self.eps_last.get(&id).copied().unwrap_or(0)
    }

    /// Honest entitlement handed out through the showup oracle in `epoch`.
    pub fn ent_sum(&self, epoch: u64) -> u64 {
        self.ent_sum.get(&epoch).copied().unwrap_or(0)
    }

    /// Number of showup-oracle outputs recorded for `epoch`.
    pub fn showups_logged(&self, epoch: u64) -> usize {
        self.log.get(&epoch).map_or(0, Vec::len)
    }

    pub fn two_log(&self, side: usize) -> &TransactionLog<S> {
        &self.two_logs[side]
    }

    pub fn station_log(&self) -> &TransactionLog<S> {
        &self.ds_log
    }

    pub fn station_blocklist(&self) -> &Blocklist<S::Revocation> {
        &self.ds_bl
    }

    /// Number of verify-entitlement oracle queries so far.
    pub fn verify_calls(&self) -> usize {
        self.verify_calls
    }

    /// Total entitlement of malicious users, optionally only those not on
    /// the station's blocklist.
    pub fn malicious_entitlement(&self, skip_revoked: bool) -> u64 {
        self.malicious
            .iter()
            .filter(|id| !skip_revoked || !self.ds_bl.contains_bytes(&self.rev[id].entry_bytes()))
            .map(|id| u64::from(self.ent[id]))
            .sum()
    }

    fn fresh_id(&self, id: UserId) -> bool {
        !self.honest.contains(&id) && !self.malicious.contains(&id)
    }

    pub fn honest_reg(&mut self, id: UserId, ent: u32) -> Result<(), OracleError> {
        if !self.fresh_id(id) || self.pre.contains(&id) {
            return Err(OracleError::Rejected);
        }
        let mut token = S::setup_token(&self.pk);
        let req = S::prepare_reg(&mut token, &mut self.rng)?;
        let rs = self.rs.as_ref().ok_or(OracleError::Rejected)?;
        let (resp, _) = S::process_reg(rs, ent, &req, &mut self.rng)?;
        let (ent, rev) = S::finish_reg(&mut token, &resp, &mut self.rng)?;
        self.honest.insert(id);
        self.ent.insert(id, ent);
        self.rev.insert(id, rev);
        self.tokens.insert(id, token);
        Ok(())
    }

    pub fn mal_user_reg(
        &mut self,
        id: UserId,
        ent: u32,
        req: &S::Request,
    ) -> Result<S::Response, OracleError> {
        if !self.fresh_id(id) || self.pre.contains(&id) {
            return Err(OracleError::Rejected);
        }
        let rs = self.rs.as_ref().ok_or(OracleError::Rejected)?;
        let (resp, rev) = S::process_reg(rs, ent, req, &mut self.rng)?;
        self.malicious.insert(id);
        self.ent.insert(id, ent);
        self.rev.insert(id, rev);
        Ok(resp)
    }

    pub fn prepare_reg(&mut self, id: UserId) -> Result<S::Request, OracleError> {
        if !self.fresh_id(id) {
            return Err(OracleError::Rejected);
        }
        let mut token = S::setup_token(&self.pk);
        let req = S::prepare_reg(&mut token, &mut self.rng)?;
        self.tokens.insert(id, token);
        self.pre.insert(id);
        Ok(req)
    }

    pub fn finish_reg(&mut self, id: UserId, resp: &S::Response) -> Result<(), OracleError> {
        if !self.pre.contains(&id) || self.honest.contains(&id) {
            return Err(OracleError::Rejected);
        }
        let token = self.tokens.get_mut(&id).ok_or(OracleError::Rejected)?;
        let (ent, rev) = S::finish_reg(token, resp, &mut self.rng)?;
        self.honest.insert(id);
        self.ent.insert(id, ent);
        self.rev.insert(id, rev);
        Ok(())
    }

    /// `Ok(None)` is the token's abort output; it is not logged and adds
    /// nothing to the epoch's entitlement sum.
    pub fn showup(
        &mut self,
        id: UserId,
        epoch: u64,
        bl: &Blocklist<S::Revocation>,
    ) -> Result<Option<S::Showup>, OracleError> {
        if !self.honest.contains(&id) {
            return Err(OracleError::Rejected);
        }
        let token = self.tokens.get_mut(&id).expect("honest users hold a token");
        let out = S::showup(&self.params, token, epoch, bl, &mut self.rng)?;
        let last = self.eps_last.entry(id).or_insert(0);
        *last = (*last).max(epoch);
        if let Some(s) = &out {
            self.log.entry(epoch).or_default().push(s.clone());
            *self.ent_sum.entry(epoch).or_insert(0) += u64::from(S::showup_ent(s));
        }
        Ok(out)
    }

    /// Runs `id0` at station 0 and `id1` at station 1. Each station logs
    /// the output if it verifies and its tag is new.
    pub fn showup_two(
        &mut self,
        id0: UserId,
        id1: UserId,
        epoch: u64,
        bl: &Blocklist<S::Revocation>,
    ) -> Result<(), OracleError> {
        if !self.honest.contains(&id0) || !self.honest.contains(&id1) {
            return Err(OracleError::Rejected);
        }
        let bl_hash = bl.digest();
        for (side, id) in [id0, id1].into_iter().enumerate() {
            let token = self.tokens.get_mut(&id).expect("honest users hold a token");
            let Some(out) = S::showup(&self.params, token, epoch, bl, &mut self.rng)? else {
                continue;
            };
            let log = &self.two_logs[side];
            if S::verify_ent(&self.params, &self.pk, epoch, &out, bl)
                && !log.contains_tag(epoch, &S::showup_tag_bytes(&out))
            {
                log.insert(epoch, out, bl_hash);
            }
        }
        Ok(())
    }

    /// Honest station check against its own blocklist. Returns whether the
    /// output was accepted.
    pub fn verify_ent(&mut self, epoch: u64, showup: &S::Showup) -> bool {
        self.ds_frozen = true;
        self.verify_calls += 1;
        if self
            .ds_log
            .contains_tag(epoch, &S::showup_tag_bytes(showup))
        {
            return false;
        }
        if !S::verify_ent(&self.params, &self.pk, epoch, showup, &self.ds_bl) {
            return false;
        }
        self.ds_log
            .insert(epoch, showup.clone(), self.ds_bl.digest())
            == InsertOutcome::Accepted
    }

    /// Honest registration station adds `id`'s revocation value to the
    /// station blocklist. Refused once the station has started verifying,
    /// so every record is checked against the same blocklist.
    pub fn revoke(&mut self, id: UserId) -> Result<(), OracleError> {
        if self.ds_frozen {
            return Err(OracleError::Rejected);
        }
        let rev = self.rev.get(&id).ok_or(OracleError::Rejected)?;
        self.ds_bl.revoke(rev.clone());
        Ok(())
    }
}

/// The adversary's view: only the oracles in `allowed` answer.
pub struct Oracles<'a, S: AidScheme> {
    gs: &'a mut GameState<S>,
    allowed: &'a [OracleKind],
}

impl<'a, S: AidScheme> Oracles<'a, S> {
    pub(crate) fn new(gs: &'a mut GameState<S>, allowed: &'a [OracleKind]) -> Self {
        Oracles { gs, allowed }
    }

    /// Wraps game state directly; for tests of oracle availability.
    #[doc(hidden)]
    pub fn new_for_test(gs: &'a mut GameState<S>, allowed: &'a [OracleKind]) -> Self {
        Self::new(gs, allowed)
    }

    fn check(&self, kind: OracleKind) -> Result<(), OracleError> {
        if self.allowed.contains(&kind) {
            Ok(())
        } else {
            Err(OracleError::Unavailable(kind))
        }
    }

    pub fn allows(&self, kind: OracleKind) -> bool {
        self.allowed.contains(&kind)
    }

    pub fn params(&self) -> &Arc<SystemParams> {
        &self.gs.params
    }

    pub fn public_key(&self) -> &S::PublicKey {
        &self.gs.pk
    }

    /// Public blocklist of the honest station.
    pub fn station_blocklist(&self) -> &Blocklist<S::Revocation> {
        &self.gs.ds_bl
    }

    pub fn honest_reg(&mut self, id: UserId, ent: u32) -> Result<(), OracleError> {
        self.check(OracleKind::HonestReg)?;
        self.gs.honest_reg(id, ent)
    }

    pub fn mal_user_reg(
        &mut self,
        id: UserId,
        ent: u32,
        req: &S::Request,
    ) -> Result<S::Response, OracleError> {
        self.check(OracleKind::MalUserReg)?;
        self.gs.mal_user_reg(id, ent, req)
    }

    pub fn prepare_reg(&mut self, id: UserId) -> Result<S::Request, OracleError> {
        self.check(OracleKind::PrepareReg)?;
        self.gs.prepare_reg(id)
    }

    pub fn finish_reg(&mut self, id: UserId, resp: &S::Response) -> Result<(), OracleError> {
        self.check(OracleKind::FinishReg)?;
        self.gs.finish_reg(id, resp)
    }

    pub fn showup(
        &mut self,
        id: UserId,
        epoch: u64,
        bl: &Blocklist<S::Revocation>,
    ) -> Result<Option<S::Showup>, OracleError> {
        self.check(OracleKind::Showup)?;
        self.gs.showup(id, epoch, bl)
    }

    pub fn showup_two(
        &mut self,
        id0: UserId,
        id1: UserId,
        epoch: u64,
        bl: &Blocklist<S::Revocation>,
    ) -> Result<(), OracleError> {
        self.check(OracleKind::ShowupTwo)?;
        self.gs.showup_two(id0, id1, epoch, bl)
    }

    pub fn verify_ent(&mut self, epoch: u64, showup: &S::Showup) -> Result<bool, OracleError> {
        self.check(OracleKind::VerifyEnt)?;
        Ok(self.gs.verify_ent(epoch, showup))
    }

    pub fn revoke(&mut self, id: UserId) -> Result<(), OracleError> {
        self.check(OracleKind::Revoke)?;
        self.gs.revoke(id)
    }
}
