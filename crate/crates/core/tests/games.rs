use std::sync::Arc;

use aidkit::blocklist::Blocklist;
use aidkit::crypto::encoding::Wire;
use aidkit::games::kit::{adversary_names, challenge_bit, run_named, KitScheme};
use aidkit::games::*;
use aidkit::protocol::{AidScheme, CardSystem, PhoneSystem, SystemParams};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn params() -> Arc<SystemParams> {
    Arc::new(SystemParams::default())
}

#[test]
fn finish_without_prepare_is_refused() {
    let p = params();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let rs = PhoneSystem::setup_rs(&mut rng);
    let pk = PhoneSystem::public_key(&rs);
    let mut gs = GameState::<PhoneSystem>::with_public_key(Arc::clone(&p), pk.clone(), 1);

    // A response produced for some other token.
    let mut other = PhoneSystem::setup_token(&pk);
    let req = PhoneSystem::prepare_reg(&mut other, &mut rng).unwrap();
    let (resp, _) = PhoneSystem::process_reg(&rs, 3, &req, &mut rng).unwrap();
    assert_eq!(gs.finish_reg(5, &resp), Err(OracleError::Rejected));

    let req = gs.prepare_reg(5).unwrap();
    let (resp, rev) = PhoneSystem::process_reg(&rs, 3, &req, &mut rng).unwrap();
    gs.finish_reg(5, &resp).unwrap();
    assert!(gs.is_honest(5));
    assert_eq!(gs.entitlement(5), Some(3));
    assert_eq!(gs.revocation(5), Some(&rev));
    // Finishing twice is refused.
    assert_eq!(gs.finish_reg(5, &resp), Err(OracleError::Rejected));
}

#[test]
fn honest_reg_records_entitlement_and_revocation() {
    let mut gs = GameState::<CardSystem>::with_honest_rs(params(), 2);
    gs.honest_reg(1, 4).unwrap();
    assert!(gs.is_honest(1));
    assert_eq!(gs.entitlement(1), Some(4));
    assert!(gs.revocation(1).is_some());
    assert_eq!(gs.honest_reg(1, 4), Err(OracleError::Rejected));
}

#[test]
fn malicious_registration_is_withheld_from_card_attackers() {
    for exp in [Experiment::Aud, Experiment::Sec] {
        assert!(!exp.oracles(Config::Card).contains(&OracleKind::MalUserReg));
        assert!(exp.oracles(Config::Phone).contains(&OracleKind::MalUserReg));
    }
    let mut gs = GameState::<CardSystem>::with_honest_rs(params(), 3);
    let mut o = Oracles::new_for_test(&mut gs, Experiment::Aud.oracles(Config::Card));
    assert_eq!(
        o.mal_user_reg(1, 1, &aidkit::protocol::NoRequest)
            .unwrap_err(),
        OracleError::Unavailable(OracleKind::MalUserReg)
    );
}

#[test]
fn showup_oracle_bookkeeping() {
    let mut gs = GameState::<CardSystem>::with_honest_rs(params(), 4);
    let bl = Blocklist::new();
    assert_eq!(gs.showup(9, 1, &bl).unwrap_err(), OracleError::Rejected);

    gs.honest_reg(1, 5).unwrap();
    assert!(gs.showup(1, 3, &bl).unwrap().is_some());
    assert_eq!(gs.epoch_last(1), 3);
    assert_eq!(gs.ent_sum(3), 5);

    // Stale epoch: the card aborts, nothing is logged, the max stays.
    assert!(gs.showup(1, 2, &bl).unwrap().is_none());
    assert_eq!(gs.epoch_last(1), 3);
    assert_eq!(gs.ent_sum(2), 0);
    assert_eq!(gs.showups_logged(2), 0);

    // Blocked: aborts too.
    gs.honest_reg(2, 1).unwrap();
    let blocked = Blocklist::from_entries([*gs.revocation(2).unwrap()]);
    assert!(gs.showup(2, 4, &blocked).unwrap().is_none());
    assert_eq!(gs.ent_sum(4), 0);
    assert_eq!(gs.epoch_last(2), 4);
}

#[test]
fn showup_two_logs_each_side() {
    let mut gs = GameState::<PhoneSystem>::with_honest_rs(params(), 5);
    let bl = Blocklist::new();
    gs.honest_reg(0, 2).unwrap();
    gs.honest_reg(1, 2).unwrap();
    assert_eq!(gs.showup_two(0, 7, 1, &bl), Err(OracleError::Rejected));
    gs.showup_two(0, 1, 1, &bl).unwrap();
    assert_eq!(gs.two_log(0).len(1), 1);
    assert_eq!(gs.two_log(1).len(1), 1);
    // Both tokens already answered in epoch 1.
    gs.showup_two(0, 1, 1, &bl).unwrap();
    assert_eq!(gs.two_log(0).len(1), 1);
}

#[test]
fn station_blocklist_freezes_once_verification_starts() {
    let mut gs = GameState::<CardSystem>::with_honest_rs(params(), 6);
    gs.honest_reg(1, 1).unwrap();
    gs.honest_reg(2, 1).unwrap();
    gs.revoke(1).unwrap();
    let s = gs
        .showup(2, 1, &gs.station_blocklist().clone())
        .unwrap()
        .unwrap();
    assert!(gs.verify_ent(1, &s));
    assert!(!gs.verify_ent(1, &s));
    assert_eq!(gs.revoke(2), Err(OracleError::Rejected));
}

struct Recording {
    seen: Vec<Vec<u8>>,
}

impl<S: AidScheme> AudAdversary<S> for Recording {
    fn name(&self) -> &'static str {
        "recording"
    }

    fn run(&mut self, o: &mut Oracles<'_, S>, _: &mut ChaCha20Rng) -> AudClaim<S> {
        o.honest_reg(1, 3).unwrap();
        o.honest_reg(2, 4).unwrap();
        let bl = Blocklist::new();
        let outs: Vec<S::Showup> = [1, 2]
            .iter()
            .filter_map(|&id| o.showup(id, 1, &bl).unwrap())
            .collect();
        self.seen = outs.iter().map(|s| s.to_bytes()).collect();
        let log = aidkit::protocol::TransactionLog::<S>::new();
        for s in outs {
            log.insert(1, s, bl.digest());
        }
        let (ent_sum, proof) = log.gen_audit(1).unwrap();
        AudClaim {
            epoch: 1,
            ent_sum,
            proof,
            blocklist: bl,
        }
    }
}

fn deterministic<S: AidScheme>() {
    let p = params();
    let mut a = Recording { seen: vec![] };
    let mut b = Recording { seen: vec![] };
    // An honest claim verifies but does not exceed the bound.
    assert_eq!(run_exp_aud::<S, _>(&p, &mut a, 77), Outcome::Lose);
    assert_eq!(run_exp_aud::<S, _>(&p, &mut b, 77), Outcome::Lose);
    assert_eq!(a.seen, b.seen);
    let mut c = Recording { seen: vec![] };
    run_exp_aud::<S, _>(&p, &mut c, 78);
    assert_ne!(a.seen, c.seen);
}

#[test]
fn experiments_are_deterministic_per_seed() {
    deterministic::<CardSystem>();
    deterministic::<PhoneSystem>();
}

fn kit_never_wins<S: KitScheme>(seeds: std::ops::Range<u64>) {
    let p = params();
    for exp in [Experiment::Aud, Experiment::Sec, Experiment::Rev] {
        for name in adversary_names(exp) {
            let s = run_named::<S>(&p, exp, name, seeds.clone()).unwrap();
            assert_eq!(s.wins, 0, "{s}");
        }
    }
    let s = run_named::<S>(&p, Experiment::Ind, "per-token-keys", seeds.clone()).unwrap();
    assert_eq!(s.wins, 0, "{s}");
    let s = run_named::<S>(&p, Experiment::Ent, "cross-station-replay", seeds).unwrap();
    assert_eq!(s.wins, 0, "{s}");
}

#[test]
fn card_kit_never_wins() {
    kit_never_wins::<CardSystem>(0..12);
}

#[test]
fn phone_kit_never_wins() {
    kit_never_wins::<PhoneSystem>(0..6);
}

#[test]
fn baselines_hover_around_one_half() {
    let p = params();
    for exp in [Experiment::Ind, Experiment::Ent] {
        for name in ["blind-guess", "byte-compare"] {
            let s = run_named::<CardSystem>(&p, exp, name, 0..300).unwrap();
            assert_eq!(s.guards, 0, "{s}");
            assert!((s.win_rate() - 0.5).abs() <= 0.1, "{s}");
        }
    }
}

#[test]
fn challenge_bits_are_balanced() {
    let ones = (0..2000).filter(|&s| challenge_bit(s)).count();
    assert!((900..1100).contains(&ones));
}

#[test]
fn summary_rows_match_header() {
    let s = run_named::<CardSystem>(&params(), Experiment::Sec, "random-forgery", 0..2).unwrap();
    let row = s.to_string();
    assert_eq!(
        row.split('\t').count(),
        TrialSummary::TSV_HEADER.split('\t').count()
    );
    assert!(row.starts_with("SEC\tcard\trandom-forgery\t2\t0\t"));
}

/// Every attack must reach the check it targets: AUD claims exceed the
/// bound, SEC and REV attacks submit something to the station.
fn attacks_reach_their_target<S: KitScheme>(config: Config) {
    use aidkit::games::kit::{AudAttack, AudKit, RevAttack, RevKit, SecAttack, SecKit};
    use aidkit::protocol::auditor_verify;
    let p = params();
    for attack in AudAttack::ALL {
        let mut gs = GameState::<S>::with_honest_rs(Arc::clone(&p), 5);
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let claim = AudAdversary::<S>::run(
            &mut AudKit { attack },
            &mut Oracles::new_for_test(&mut gs, Experiment::Aud.oracles(config)),
            &mut rng,
        );
        let bound = gs.ent_sum(claim.epoch) + gs.malicious_entitlement(false);
        let withheld = attack == AudAttack::MaliciousDoubleShow && config == Config::Card;
        assert_eq!(claim.ent_sum > bound, !withheld, "{}", attack.name());
        let verdict = auditor_verify::<S>(
            &p,
            gs.public_key(),
            claim.epoch,
            claim.ent_sum,
            &claim.proof,
            &claim.blocklist,
        );
        assert_eq!(verdict.is_err(), !withheld, "{}", attack.name());
    }
    for attack in SecAttack::ALL {
        let mut gs = GameState::<S>::with_honest_rs(Arc::clone(&p), 6);
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        SecAdversary::<S>::run(
            &mut SecKit { attack },
            &mut Oracles::new_for_test(&mut gs, Experiment::Sec.oracles(config)),
            &mut rng,
        );
        assert!(gs.verify_calls() >= 1, "{}", attack.name());
    }
    if config == Config::Phone {
        for attack in RevAttack::ALL {
            let mut gs = GameState::<S>::with_honest_rs(Arc::clone(&p), 7);
            let mut rng = ChaCha20Rng::seed_from_u64(7);
            SecAdversary::<S>::run(
                &mut RevKit { attack },
                &mut Oracles::new_for_test(&mut gs, Experiment::Rev.oracles(config)),
                &mut rng,
            );
            let expected = usize::from(attack != RevAttack::HonestToken);
            assert_eq!(gs.verify_calls(), expected, "{}", attack.name());
            assert_eq!(gs.station_log().len(1), 0, "{}", attack.name());
        }
    }
}

#[test]
fn card_attacks_reach_their_target() {
    attacks_reach_their_target::<CardSystem>(Config::Card);
}

#[test]
fn phone_attacks_reach_their_target() {
    attacks_reach_their_target::<PhoneSystem>(Config::Phone);
}
