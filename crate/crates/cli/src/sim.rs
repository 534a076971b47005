//! End-to-end driver: registration station, households with their tokens,
//! one distribution station per epoch and the auditor, all in process.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use aidkit::blocklist::{Blocklist, BlocklistEntry};
use aidkit::crypto::encoding::{DecodeError, Decoder, Encoder, Wire};
use aidkit::protocol::{
    auditor_verify, merge_tag_sets, AidScheme, AuditProof, AuditReject, DistributionStation,
    MergeReport, Receipt, SystemParams, TransactionLog,
};
use rand::seq::index::sample;
use rayon::prelude::*;
use serde::Serialize;

use crate::artifact::{self, ArtifactKind};
use crate::error::{Result, SimError};
use crate::scenario::{rng_for, ScenarioConfig, SystemKind};

/// File names inside an output directory.
#[derive(Debug, Clone)]
pub struct Layout {
    pub dir: PathBuf,
}

impl Layout {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Layout { dir: dir.into() }
    }

    pub fn scenario(&self) -> PathBuf {
        self.dir.join("scenario.json")
    }

    pub fn rs_key(&self) -> PathBuf {
        self.dir.join("rs_key.bin")
    }

    pub fn public_key(&self) -> PathBuf {
        self.dir.join("public_key.bin")
    }

    pub fn households(&self) -> PathBuf {
        self.dir.join("households.bin")
    }

    /// Revocations applying from the next distribution on.
    pub fn blocklist(&self) -> PathBuf {
        self.dir.join("blocklist.bin")
    }

    /// Blocklist frozen for one epoch's distribution.
    pub fn epoch_blocklist(&self, epoch: u64) -> PathBuf {
        self.dir.join(format!("bl_{epoch}.bin"))
    }

    pub fn log(&self) -> PathBuf {
        self.dir.join("log.bin")
    }

    pub fn distribution(&self, epoch: u64) -> PathBuf {
        self.dir.join(format!("distribute_{epoch}.tsv"))
    }

    pub fn audit(&self, epoch: u64) -> PathBuf {
        self.dir.join(format!("audit_{epoch}.bin"))
    }

    pub fn audit_summary(&self, epoch: u64) -> PathBuf {
        self.dir.join(format!("audit_{epoch}.txt"))
    }

    /// Epochs that already have a frozen blocklist on disk.
    pub fn distributed_epochs(&self) -> Result<BTreeSet<u64>> {
        let entries = std::fs::read_dir(&self.dir).map_err(|source| SimError::Io {
            path: self.dir.clone(),
            source,
        })?;
        Ok(entries
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                let name = e.file_name().into_string().ok()?;
                name.strip_prefix("bl_")?.strip_suffix(".bin")?.parse().ok()
            })
            .collect())
    }
}

/// Reads the system named in an output directory's scenario.
pub fn stored_system(layout: &Layout) -> Result<SystemKind> {
    Ok(ScenarioConfig::load(&layout.scenario())?.system)
}

pub struct Household<S: AidScheme> {
    pub id: u32,
    pub ent: u32,
    /// Revocation value as the registration station recorded it.
    pub revocation: S::Revocation,
    pub tokens: Vec<S::Token>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct HouseholdReceipts {
    pub household: u32,
    pub accepted: u32,
    pub duplicate: u32,
    /// Token refused to show up (revoked, or already used this epoch).
    pub blocked: u32,
    pub invalid: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DistributionReport {
    pub epoch: u64,
    pub blocklist_len: usize,
    pub households: Vec<HouseholdReceipts>,
}

impl DistributionReport {
    pub fn totals(&self) -> HouseholdReceipts {
        self.households
            .iter()
            .fold(HouseholdReceipts::default(), |mut t, h| {
                t.accepted += h.accepted;
                t.duplicate += h.duplicate;
                t.blocked += h.blocked;
                t.invalid += h.invalid;
                t
            })
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("epoch\thousehold\taccepted\tduplicate\tblocked\tinvalid\n");
        for h in &self.households {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                self.epoch, h.household, h.accepted, h.duplicate, h.blocked, h.invalid
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditReport {
    pub epoch: u64,
    pub records: usize,
    pub ent_sum: u64,
    pub verdict: Result<(), AuditReject>,
}

impl AuditReport {
    pub fn to_tsv(&self) -> String {
        format!(
            "epoch\trecords\tent_sum\tverdict\n{}\t{}\t{}\t{}\n",
            self.epoch,
            self.records,
            self.ent_sum,
            verdict_text(&self.verdict)
        )
    }
}

pub fn verdict_text(verdict: &Result<(), AuditReject>) -> String {
    match verdict {
        Ok(()) => "accept".into(),
        Err(e) => format!("reject ({e:?})"),
    }
}

/// An audit as handed to the auditor: the claimed total and the proof.
pub struct AuditClaim<S: AidScheme> {
    pub ent_sum: u64,
    pub proof: AuditProof<S>,
}

impl<S: AidScheme> Wire for AuditClaim<S> {
    fn encode(&self, enc: &mut Encoder) {
        enc.u64(self.ent_sum).field(&self.proof.to_bytes());
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(AuditClaim {
            ent_sum: dec.u64()?,
            proof: AuditProof::from_bytes(dec.field()?)?,
        })
    }
}

pub struct Simulation<S: AidScheme> {
    pub scenario: ScenarioConfig,
    params: Arc<SystemParams>,
    rs: S::RsKey,
    pk: S::PublicKey,
    households: Vec<Household<S>>,
    blocklist: Blocklist<S::Revocation>,
    epoch_blocklists: BTreeMap<u64, Blocklist<S::Revocation>>,
    log: Arc<TransactionLog<S>>,
}

impl<S: AidScheme> Simulation<S> {
    /// Registration station setup.
    pub fn setup(scenario: ScenarioConfig) -> Result<Self> {
        scenario.validate()?;
        let rs = S::setup_rs(&mut rng_for(scenario.seed, "setup", &[]));
        let pk = S::public_key(&rs);
        Ok(Simulation {
            scenario,
            params: Arc::new(SystemParams::default()),
            rs,
            pk,
            households: Vec::new(),
            blocklist: Blocklist::new(),
            epoch_blocklists: BTreeMap::new(),
            log: Arc::new(TransactionLog::new()),
        })
    }

    pub fn params(&self) -> &Arc<SystemParams> {
        &self.params
    }

    pub fn public_key(&self) -> &S::PublicKey {
        &self.pk
    }

    pub fn households(&self) -> &[Household<S>] {
        &self.households
    }

    pub fn blocklist(&self) -> &Blocklist<S::Revocation> {
        &self.blocklist
    }

    pub fn epoch_blocklist(&self, epoch: u64) -> Option<&Blocklist<S::Revocation>> {
        self.epoch_blocklists.get(&epoch)
    }

    pub fn log(&self) -> &Arc<TransactionLog<S>> {
        &self.log
    }

    pub fn is_revoked(&self, household: u32) -> bool {
        self.households
            .get(household as usize)
            .is_some_and(|h| self.blocklist.contains_bytes(&h.revocation.entry_bytes()))
    }

    /// Registers every household of the scenario with one token each.
    pub fn register(&mut self) -> Result<()> {
        if !self.households.is_empty() {
            return Err(SimError::Usage("households are already registered".into()));
        }
        let (scenario, rs, pk) = (&self.scenario, &self.rs, &self.pk);
        self.households = (0..scenario.households)
            .into_par_iter()
            .map(|id| {
                let mut rng = rng_for(scenario.seed, "register", &[u64::from(id)]);
                let ent = scenario.entitlement_of(id);
                let mut token = S::setup_token(pk);
                let req = S::prepare_reg(&mut token, &mut rng)?;
                let (resp, revocation) = S::process_reg(rs, ent, &req, &mut rng)?;
                let (learned, _) = S::finish_reg(&mut token, &resp, &mut rng)?;
                if learned != ent {
                    return Err(SimError::Verification(format!(
                        "household {id} learned entitlement {learned}, registered {ent}"
                    )));
                }
                Ok(Household {
                    id,
                    ent,
                    revocation,
                    tokens: vec![token],
                })
            })
            .collect::<Result<_>>()?;
        Ok(())
    }

    /// Copies each household's first token until it holds `cards` tokens.
    pub fn clone_tokens(&mut self, cards: u32) -> Result<usize> {
        let pk = &self.pk;
        let added = self
            .households
            .par_iter_mut()
            .map(|h| {
                let mut added = 0;
                while h.tokens.len() < cards as usize {
                    let copy = S::copy_token(pk, &h.tokens[0])?;
                    h.tokens.push(copy);
                    added += 1;
                }
                Ok(added)
            })
            .collect::<Result<Vec<usize>>>()?;
        Ok(added.into_iter().sum())
    }

    /// Adds households to the blocklist used from the next distribution on.
    /// Returns the ids that were newly revoked.
    pub fn revoke(&mut self, ids: &[u32]) -> Result<Vec<u32>> {
        let mut newly = Vec::new();
        for &id in ids {
            let h = self
                .households
                .get(id as usize)
                .ok_or_else(|| SimError::Usage(format!("no household {id}")))?;
            if self.blocklist.revoke(h.revocation.clone()) {
                newly.push(id);
            }
        }
        Ok(newly)
    }

    /// Revokes the scenario's per-epoch quota of households, chosen from the
    /// seed and the current blocklist size among those not yet revoked.
    pub fn revoke_scheduled(&mut self) -> Result<Vec<u32>> {
        let candidates: Vec<u32> = self
            .households
            .iter()
            .map(|h| h.id)
            .filter(|&id| !self.is_revoked(id))
            .collect();
        let count = (self.scenario.revocations_per_epoch as usize).min(candidates.len());
        let mut rng = rng_for(self.scenario.seed, "revoke", &[self.blocklist.len() as u64]);
        let mut chosen: Vec<u32> = sample(&mut rng, candidates.len(), count)
            .into_iter()
            .map(|i| candidates[i])
            .collect();
        chosen.sort_unstable();
        self.revoke(&chosen)
    }

    /// Every token of every household shows up once at a station open for
    /// `epoch`. Households run in parallel; a household's tokens run in
    /// order, so the first copy is the one that gets served.
    pub fn distribute(&mut self, epoch: u64) -> Result<DistributionReport> {
        if let Some((&last, _)) = self.epoch_blocklists.last_key_value() {
            if epoch <= last {
                return Err(SimError::Usage(format!(
                    "epoch {epoch} is not after the last distributed epoch {last}"
                )));
            }
        }
        let station = DistributionStation::with_log(
            Arc::clone(&self.params),
            self.pk.clone(),
            Arc::clone(&self.log),
        );
        station.open_epoch(epoch, self.blocklist.clone())?;
        let bl = station.blocklist().expect("epoch is open");
        let (params, seed) = (&self.params, self.scenario.seed);
        let households = self
            .households
            .par_iter_mut()
            .map(|h| {
                let mut receipts = HouseholdReceipts {
                    household: h.id,
                    ..Default::default()
                };
                for (copy, token) in h.tokens.iter_mut().enumerate() {
                    let mut rng = rng_for(seed, "showup", &[epoch, u64::from(h.id), copy as u64]);
                    match S::showup(params, token, epoch, &bl, &mut rng)? {
                        None => receipts.blocked += 1,
                        Some(s) => match station.receive(s) {
                            Receipt::Accepted => receipts.accepted += 1,
                            Receipt::Duplicate => receipts.duplicate += 1,
                            Receipt::Invalid | Receipt::EpochClosed => receipts.invalid += 1,
                        },
                    }
                }
                Ok(receipts)
            })
            .collect::<Result<Vec<_>>>()?;
        self.epoch_blocklists.insert(epoch, (*bl).clone());
        Ok(DistributionReport {
            epoch,
            blocklist_len: bl.len(),
            households,
        })
    }

    /// Aggregates the epoch's log and runs the auditor's check on it.
    pub fn audit(&self, epoch: u64) -> Result<(AuditReport, AuditClaim<S>)> {
        let bl = self
            .epoch_blocklists
            .get(&epoch)
            .ok_or_else(|| SimError::Usage(format!("epoch {epoch} was never distributed")))?;
        let (ent_sum, proof) = self.log.gen_audit(epoch)?;
        let claim = AuditClaim { ent_sum, proof };
        Ok((self.verify_claim(epoch, &claim, bl), claim))
    }

    pub fn verify_claim(
        &self,
        epoch: u64,
        claim: &AuditClaim<S>,
        bl: &Blocklist<S::Revocation>,
    ) -> AuditReport {
        AuditReport {
            epoch,
            records: claim.proof.len(),
            ent_sum: claim.ent_sum,
            verdict: auditor_verify(
                &self.params,
                &self.pk,
                epoch,
                claim.ent_sum,
                &claim.proof,
                bl,
            ),
        }
    }
}

// ---------------------------------------------------------------------------
// Persistence.

fn encode_households<S: AidScheme>(households: &[Household<S>]) -> Vec<u8> {
    let mut enc = Encoder::new();
    enc.u32(households.len() as u32);
    for h in households {
        enc.u32(h.id).u32(h.ent).field(&h.revocation.entry_bytes());
        enc.u32(h.tokens.len() as u32);
        for t in &h.tokens {
            enc.field(&S::export_token(t));
        }
    }
    enc.finish()
}

fn decode_households<S: AidScheme>(bytes: &[u8]) -> Result<Vec<Household<S>>, DecodeError> {
    let mut dec = Decoder::new(bytes)?;
    let count = dec.u32()?;
    let mut out = Vec::new();
    for index in 0..count {
        let id = dec.u32()?;
        if id != index {
            return Err(DecodeError::Invalid("household order"));
        }
        let ent = dec.u32()?;
        let revocation = S::Revocation::from_entry_bytes(dec.field()?)?;
        let tokens = (0..dec.u32()?)
            .map(|_| S::import_token(dec.field()?))
            .collect::<Result<_, _>>()?;
        out.push(Household {
            id,
            ent,
            revocation,
            tokens,
        });
    }
    dec.finish()?;
    Ok(out)
}

fn read_wire<T: Wire>(path: &Path, kind: ArtifactKind, system: SystemKind) -> Result<T> {
    let payload = artifact::read(path, kind, system)?;
    T::from_bytes(&payload).map_err(|e| SimError::corrupt(path, e))
}

fn write_wire<T: Wire>(
    path: &Path,
    kind: ArtifactKind,
    system: SystemKind,
    value: &T,
) -> Result<()> {
    artifact::write(path, kind, system, &value.to_bytes())
}

impl<S: AidScheme> Simulation<S> {
    fn system(&self) -> SystemKind {
        self.scenario.system
    }

    /// Writes the setup artifacts: scenario, station key and public key.
    pub fn save_setup(&self, layout: &Layout) -> Result<()> {
        self.scenario.save(&layout.scenario())?;
        write_wire(
            &layout.rs_key(),
            ArtifactKind::RsKey,
            self.system(),
            &self.rs,
        )?;
        write_wire(
            &layout.public_key(),
            ArtifactKind::PublicKey,
            self.system(),
            &self.pk,
        )
    }

    pub fn save_households(&self, layout: &Layout) -> Result<()> {
        artifact::write(
            &layout.households(),
            ArtifactKind::Households,
            self.system(),
            &encode_households(&self.households),
        )
    }

    pub fn save_blocklist(&self, layout: &Layout) -> Result<()> {
        write_wire(
            &layout.blocklist(),
            ArtifactKind::Blocklist,
            self.system(),
            &self.blocklist,
        )
    }

    /// Writes the log and the frozen blocklist of `epoch`.
    pub fn save_distribution(&self, layout: &Layout, report: &DistributionReport) -> Result<()> {
        let bl = &self.epoch_blocklists[&report.epoch];
        write_wire(
            &layout.epoch_blocklist(report.epoch),
            ArtifactKind::Blocklist,
            self.system(),
            bl,
        )?;
        write_wire(&layout.log(), ArtifactKind::Log, self.system(), &*self.log)?;
        artifact::write_bytes(
            &layout.distribution(report.epoch),
            report.to_tsv().as_bytes(),
        )
    }

    pub fn save_audit(
        &self,
        layout: &Layout,
        report: &AuditReport,
        claim: &AuditClaim<S>,
    ) -> Result<()> {
        write_wire(
            &layout.audit(report.epoch),
            ArtifactKind::Audit,
            self.system(),
            claim,
        )?;
        artifact::write_bytes(
            &layout.audit_summary(report.epoch),
            report.to_tsv().as_bytes(),
        )
    }

    /// Loads the setup artifacts. Later-phase artifacts are loaded on
    /// demand by the `require_*` and `load_*` methods.
    pub fn load_setup(layout: &Layout) -> Result<Self> {
        let scenario = ScenarioConfig::load(&layout.scenario())?;
        scenario.validate()?;
        let system = scenario.system;
        let rs = read_wire(&layout.rs_key(), ArtifactKind::RsKey, system)?;
        let pk = read_wire(&layout.public_key(), ArtifactKind::PublicKey, system)?;
        Ok(Simulation {
            scenario,
            params: Arc::new(SystemParams::default()),
            rs,
            pk,
            households: Vec::new(),
            blocklist: Blocklist::new(),
            epoch_blocklists: BTreeMap::new(),
            log: Arc::new(TransactionLog::new()),
        })
    }

    pub fn require_households(&mut self, layout: &Layout) -> Result<()> {
        let path = layout.households();
        let payload = artifact::read(&path, ArtifactKind::Households, self.system())?;
        self.households =
            decode_households::<S>(&payload).map_err(|e| SimError::corrupt(&path, e))?;
        Ok(())
    }

    /// Loads the pending blocklist; none on disk means nobody is revoked.
    pub fn load_blocklist(&mut self, layout: &Layout) -> Result<()> {
        match read_wire(&layout.blocklist(), ArtifactKind::Blocklist, self.system()) {
            Ok(bl) => self.blocklist = bl,
            Err(SimError::Missing(_)) => {}
            Err(e) => return Err(e),
        }
        Ok(())
    }

    /// Loads the log if present, and the frozen blocklists of every
    /// distributed epoch.
    pub fn load_distributions(&mut self, layout: &Layout) -> Result<()> {
        match read_wire(&layout.log(), ArtifactKind::Log, self.system()) {
            Ok(log) => self.log = Arc::new(log),
            Err(SimError::Missing(_)) => {}
            Err(e) => return Err(e),
        }
        for epoch in layout.distributed_epochs()? {
            let bl = read_wire(
                &layout.epoch_blocklist(epoch),
                ArtifactKind::Blocklist,
                self.system(),
            )?;
            self.epoch_blocklists.insert(epoch, bl);
        }
        Ok(())
    }

    /// Loads exactly what an audit of `epoch` needs; every piece must exist.
    pub fn require_audit_inputs(&mut self, layout: &Layout, epoch: u64) -> Result<()> {
        self.log = Arc::new(read_wire(&layout.log(), ArtifactKind::Log, self.system())?);
        let bl = read_wire(
            &layout.epoch_blocklist(epoch),
            ArtifactKind::Blocklist,
            self.system(),
        )?;
        self.epoch_blocklists.insert(epoch, bl);
        Ok(())
    }

    pub fn load_audit_claim(&self, layout: &Layout, epoch: u64) -> Result<AuditClaim<S>> {
        read_wire(&layout.audit(epoch), ArtifactKind::Audit, self.system())
    }
}

/// Reads the tag sets several stations logged for `epoch` and merges them.
pub fn merge_logs<S: AidScheme>(
    paths: &[PathBuf],
    system: SystemKind,
    epoch: u64,
) -> Result<MergeReport> {
    let sets = paths
        .iter()
        .map(|p| {
            read_wire::<TransactionLog<S>>(p, ArtifactKind::Log, system).map(|log| log.tags(epoch))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(merge_tag_sets(&sets))
}
