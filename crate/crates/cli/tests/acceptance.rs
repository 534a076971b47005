//! Acceptance gate. Runs every end-to-end criterion at full size and prints
//! one PASS/FAIL line each; exits non-zero if any fails.
//!
//! A positional argument filters criteria by name, so `cargo test <unit
//! test name>` does not drag the whole gate along.

use std::collections::BTreeSet;
use std::fmt::Display;
use std::sync::Arc;
use std::time::Instant;

use aidkit::blocklist::Blocklist;
use aidkit::card::{AbortReason, RevocationValue};
use aidkit::crypto::encoding::{Decoder, Wire};
use aidkit::crypto::instrument;
use aidkit::crypto::{pc_combine, pc_commit};
use aidkit::games::kit::{adversary_names, run_named, KitScheme};
use aidkit::games::Experiment;
use aidkit::protocol::{AidScheme, CardSystem, PhoneSystem, SystemParams};
use aidsim::bench::{compute_fit, run_bench, BenchConfig, DEFAULT_THROUGHPUT};
use aidsim::{ScenarioConfig, Simulation, SystemKind};
use blstrs::{G1Projective, Scalar};
use ff::Field;
use group::Group;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

type Verdict = Result<String, String>;

fn err<E: Display>(e: E) -> String {
    e.to_string()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------------------
// End-to-end correctness.

const E2E_SEED: u64 = 0xA1D_2026;

/// Sum of configured entitlements over households not in `revoked`.
fn config_sum(scenario: &ScenarioConfig, revoked: &BTreeSet<u32>) -> u64 {
    (0..scenario.households)
        .filter(|h| !revoked.contains(h))
        .map(|h| u64::from(scenario.entitlement_of(h)))
        .sum()
}

fn end_to_end_one<S: AidScheme>(system: SystemKind) -> Verdict {
    let mut scenario = ScenarioConfig::new(system, 1000, E2E_SEED);
    scenario.epochs = 3;
    scenario.revocations_per_epoch = 50;
    let mut sim = Simulation::<S>::setup(scenario.clone()).map_err(err)?;
    sim.register().map_err(err)?;
    let mut revoked = BTreeSet::new();
    let mut sums = Vec::new();
    for epoch in 1..=u64::from(scenario.epochs) {
        revoked.extend(sim.revoke_scheduled().map_err(err)?);
        let report = sim.distribute(epoch).map_err(err)?;
        for h in &report.households {
            let got = (h.accepted, h.duplicate, h.blocked, h.invalid);
            let want = if revoked.contains(&h.household) {
                (0, 0, 1, 0)
            } else {
                (1, 0, 0, 0)
            };
            ensure(got == want, || {
                format!(
                    "{system} epoch {epoch} household {}: {got:?}, want {want:?}",
                    h.household
                )
            })?;
        }
        let (audit, _) = sim.audit(epoch).map_err(err)?;
        ensure(audit.verdict.is_ok(), || {
            format!("{system} epoch {epoch} audit {:?}", audit.verdict)
        })?;
        let oracle = config_sum(&scenario, &revoked);
        ensure(audit.ent_sum == oracle, || {
            format!(
                "{system} epoch {epoch} ent_sum {} vs config sum {oracle}",
                audit.ent_sum
            )
        })?;
        ensure(audit.records == 1000 - revoked.len(), || {
            format!("{system} epoch {epoch} record count")
        })?;
        sums.push(audit.ent_sum);
    }
    ensure(revoked.len() == 150, || {
        format!("{system}: {} revoked", revoked.len())
    })?;
    Ok(format!("{system} sums {sums:?}"))
}

fn end_to_end() -> Verdict {
    let card = end_to_end_one::<CardSystem>(SystemKind::Card)?;
    let phone = end_to_end_one::<PhoneSystem>(SystemKind::Phone)?;
    Ok(format!(
        "1000 households x 3 epochs, 50 revoked per epoch; {card}; {phone}"
    ))
}

// ---------------------------------------------------------------------------
// Double dipping.

fn double_dip_one<S: AidScheme>(system: SystemKind, seed: u64) -> Result<(u64, u64), String> {
    let mut scenario = ScenarioConfig::new(system, 500, seed);
    scenario.cards_per_household = 3;
    scenario.epochs = 2;
    let mut sim = Simulation::<S>::setup(scenario).map_err(err)?;
    sim.register().map_err(err)?;
    sim.clone_tokens(3).map_err(err)?;
    let (mut attempts, mut caught) = (0, 0);
    for epoch in 1..=2 {
        let report = sim.distribute(epoch).map_err(err)?;
        for h in &report.households {
            ensure(h.accepted == 1, || {
                format!(
                    "{system} seed {seed} epoch {epoch} household {}: {} accepted",
                    h.household, h.accepted
                )
            })?;
            attempts += 2;
            caught += u64::from(h.duplicate);
        }
        ensure(sim.log().len(epoch) == 500, || {
            format!("{system} seed {seed} log size")
        })?;
    }
    Ok((attempts, caught))
}

fn double_dipping() -> Verdict {
    let mut parts = Vec::new();
    for system in [SystemKind::Card, SystemKind::Phone] {
        let (mut attempts, mut caught) = (0, 0);
        for seed in 0..10 {
            let (a, c) = match system {
                SystemKind::Card => double_dip_one::<CardSystem>(system, seed)?,
                SystemKind::Phone => double_dip_one::<PhoneSystem>(system, seed)?,
            };
            attempts += a;
            caught += c;
        }
        ensure(caught == attempts, || {
            format!("{system}: caught {caught} of {attempts}")
        })?;
        parts.push(format!("{system} {caught}/{attempts} copies refused"));
    }
    Ok(format!(
        "500 households x 3 tokens x 2 epochs x 10 seeds; {}",
        parts.join(", ")
    ))
}

// ---------------------------------------------------------------------------
// Adversary kits.

/// Runs every adversary of `experiment` on its own contiguous share of
/// `total` seeds. Returns the total wins and a per-adversary breakdown.
fn run_kit<S: KitScheme>(experiment: Experiment, total: u64) -> Result<(u64, String), String> {
    let params = Arc::new(SystemParams::default());
    let names = adversary_names(experiment);
    let n = names.len() as u64;
    let mut wins = 0;
    let mut trials = 0;
    let mut parts = Vec::new();
    for (i, name) in names.iter().enumerate() {
        let i = i as u64;
        let seeds = i * total / n..(i + 1) * total / n;
        let s = run_named::<S>(&params, experiment, name, seeds).ok_or("unknown adversary")?;
        wins += s.wins;
        trials += s.trials;
        parts.push(format!("{name} {}/{}", s.wins, s.trials));
    }
    ensure(trials == total, || format!("ran {trials} trials"))?;
    Ok((wins, parts.join(" ")))
}

fn kit_zero_wins(experiment: Experiment) -> Verdict {
    let mut out = Vec::new();
    for system in [SystemKind::Card, SystemKind::Phone] {
        let (wins, detail) = match system {
            SystemKind::Card => run_kit::<CardSystem>(experiment, 1000)?,
            SystemKind::Phone => run_kit::<PhoneSystem>(experiment, 1000)?,
        };
        ensure(wins == 0, || {
            format!(
                "{system} {} kit won {wins}/1000: {detail}",
                experiment.name()
            )
        })?;
        out.push(format!("{system} 0/1000"));
    }
    Ok(out.join(", "))
}

fn revocation() -> Verdict {
    // Revoked cards refuse to show up at all.
    let mut scenario = ScenarioConfig::new(SystemKind::Card, 200, 33);
    scenario.epochs = 1;
    let mut sim = Simulation::<CardSystem>::setup(scenario).map_err(err)?;
    sim.register().map_err(err)?;
    let targets: Vec<u32> = (0..200).step_by(2).collect();
    sim.revoke(&targets).map_err(err)?;
    let report = sim.distribute(1).map_err(err)?;
    for h in &report.households {
        let revoked = h.household % 2 == 0;
        ensure(
            (h.blocked == 1) == revoked && (h.accepted == 1) != revoked,
            || format!("card household {}: {h:?}", h.household),
        )?;
        let abort = sim.households()[h.household as usize].tokens[0].last_abort();
        ensure((abort == Some(AbortReason::Blocked)) == revoked, || {
            format!("card household {} abort reason {abort:?}", h.household)
        })?;
    }
    let kits = kit_zero_wins(Experiment::Rev)?;
    Ok(format!(
        "100/100 revoked cards aborted; forge kit wins {kits}"
    ))
}

fn audit_soundness() -> Verdict {
    kit_zero_wins(Experiment::Aud).map(|s| format!("AUD kit wins {s}"))
}

fn sec_kit() -> Verdict {
    kit_zero_wins(Experiment::Sec).map(|s| format!("SEC kit wins {s}"))
}

fn baselines() -> Verdict {
    let params = Arc::new(SystemParams::default());
    let mut parts = Vec::new();
    for experiment in [Experiment::Ind, Experiment::Ent] {
        for name in ["blind-guess", "byte-compare"] {
            for system in [SystemKind::Card, SystemKind::Phone] {
                let s = match system {
                    SystemKind::Card => run_named::<CardSystem>(&params, experiment, name, 0..2000),
                    SystemKind::Phone => {
                        run_named::<PhoneSystem>(&params, experiment, name, 0..2000)
                    }
                }
                .ok_or("unknown adversary")?;
                let rate = s.win_rate();
                ensure(s.guards == 0, || {
                    format!(
                        "{} {name} {system}: {} guarded",
                        experiment.name(),
                        s.guards
                    )
                })?;
                ensure((rate - 0.5).abs() <= 0.05, || {
                    format!("{} {name} {system}: success {rate:.4}", experiment.name())
                })?;
                parts.push(format!("{} {name} {system} {rate:.3}", experiment.name()));
            }
        }
    }
    Ok(parts.join(", "))
}

// ---------------------------------------------------------------------------
// Homomorphic audit identity.

fn homomorphic_identity() -> Verdict {
    let params = SystemParams::default();
    let pc = &params.pedersen;
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let mut records = 0;
    for epoch in 0..1000 {
        let size = rng.gen_range(1..=100);
        let mut commitments = Vec::with_capacity(size);
        let (mut ent_sum, mut r_sum) = (0u64, Scalar::ZERO);
        let mut product = G1Projective::identity();
        for _ in 0..size {
            let ent: u32 = rng.gen();
            let r = Scalar::random(&mut rng);
            let c = pc_commit(pc, &Scalar::from(u64::from(ent)), &r);
            product += c.0;
            commitments.push(c);
            ent_sum += u64::from(ent);
            r_sum += r;
        }
        let combined = pc_combine(pc, &commitments).0;
        let opened = pc_commit(pc, &Scalar::from(ent_sum), &r_sum).0;
        // Second route: plain scalar multiplication and point addition.
        let direct = pc.g() * Scalar::from(ent_sum) + pc.h() * r_sum;
        ensure(
            combined == opened && product == combined && direct == opened,
            || format!("epoch {epoch} of size {size}: identity fails"),
        )?;
        records += size;
    }
    Ok(format!("1000 epochs, {records} commitments"))
}

// ---------------------------------------------------------------------------
// Scaling.

/// Squared Pearson correlation, which equals R^2 of the least-squares line.
fn pearson_r2(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (sx, sy) = (xs.iter().sum::<f64>(), ys.iter().sum::<f64>());
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let syy: f64 = ys.iter().map(|y| y * y).sum();
    let cov = n * sxy - sx * sy;
    cov * cov / ((n * sxx - sx * sx) * (n * syy - sy * sy))
}

fn scaling() -> Verdict {
    let config = BenchConfig {
        bl_sizes: vec![0, 128, 256, 512, 1024],
        throughput: DEFAULT_THROUGHPUT,
        reps: 5,
        seed: 1,
    };
    let rows = run_bench::<PhoneSystem>(&config).map_err(err)?;
    let xs: Vec<f64> = rows.iter().map(|r| r.bl_size as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.compute_ms()).collect();
    let r2 = pearson_r2(&xs, &ys);
    let fit = compute_fit(&rows).ok_or("no fit")?;
    ensure((fit.r_squared - r2).abs() < 1e-9, || {
        format!("fit R^2 {} vs {r2}", fit.r_squared)
    })?;
    ensure(r2 >= 0.99, || format!("R^2 {r2:.5} over {ys:?}"))?;
    let total = rows.last().unwrap().total_ms;
    ensure(total < 10_000.0, || {
        format!("total at 1024 is {total:.1} ms")
    })?;
    let times: Vec<String> = ys.iter().map(|y| format!("{y:.1}")).collect();
    Ok(format!(
        "R^2 {r2:.5}, showup+verify ms [{}], {:.3} ms/entry, total at 1024 {total:.1} ms",
        times.join(", "),
        fit.slope
    ))
}

// ---------------------------------------------------------------------------
// Card operation budget.

fn card_budget() -> Verdict {
    let params = SystemParams::default();
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let rs = CardSystem::setup_rs(&mut rng);
    let pk = CardSystem::public_key(&rs);
    let mut card = CardSystem::setup_token(&pk);
    let req = CardSystem::prepare_reg(&mut card, &mut rng).map_err(err)?;
    let (resp, _) = CardSystem::process_reg(&rs, 3, &req, &mut rng).map_err(err)?;
    CardSystem::finish_reg(&mut card, &resp, &mut rng).map_err(err)?;
    let bl = Blocklist::from_entries((0..100u8).map(|i| RevocationValue([i; 32])));
    let mut worst = 0.0f64;
    for epoch in 1..=100 {
        let before = instrument::snapshot();
        let start = Instant::now();
        let showup = CardSystem::showup(&params, &mut card, epoch, &bl, &mut rng).map_err(err)?;
        let ms = start.elapsed().as_secs_f64() * 1e3;
        let used = instrument::snapshot() - before;
        ensure(showup.is_some(), || format!("epoch {epoch}: card aborted"))?;
        let counts = (used.prf_evals, used.fixed_base_exps, used.signatures);
        ensure(counts == (1, 2, 1), || {
            format!("epoch {epoch}: ops {counts:?}")
        })?;
        worst = worst.max(ms);
    }
    ensure(worst < 50.0, || format!("slowest showup {worst:.2} ms"))?;
    Ok(format!(
        "1 PRF, 2 fixed-base exps, 1 signature per showup; slowest of 100 {worst:.2} ms"
    ))
}

// ---------------------------------------------------------------------------
// Message sizes.

const GOLDEN: &str = include_str!("golden/message_sizes.tsv");

fn field_sizes(bytes: &[u8], count: usize) -> Result<Vec<usize>, String> {
    let mut dec = Decoder::new(bytes).map_err(err)?;
    let sizes = (0..count)
        .map(|_| dec.field().map(<[u8]>::len))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    dec.finish().map_err(err)?;
    Ok(sizes)
}

fn message_sizes() -> Verdict {
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let rs = PhoneSystem::setup_rs(&mut rng);
    let pk = PhoneSystem::public_key(&rs);
    let mut phone = PhoneSystem::setup_token(&pk);
    let req = PhoneSystem::prepare_reg(&mut phone, &mut rng).map_err(err)?;
    let (resp, _) = PhoneSystem::process_reg(&rs, 2, &req, &mut rng).map_err(err)?;
    let req_sizes = field_sizes(&req.to_bytes(), 2)?;
    let resp_sizes = field_sizes(&resp.to_bytes(), 3)?;
    let measured = [
        ("registration_request", "commitment", req_sizes[0]),
        ("registration_request", "proof", req_sizes[1]),
        ("registration_response", "signature", resp_sizes[0]),
        ("registration_response", "entitlement", resp_sizes[1]),
        (
            "registration_response",
            "revocation_attribute",
            resp_sizes[2],
        ),
    ];
    let mut lines = GOLDEN.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().ok_or("empty golden file")?;
    ensure(
        header == "message\tfield\tencoded_bytes\treported_bytes\tdeviation",
        || format!("golden header {header:?}"),
    )?;
    let golden: Vec<Vec<&str>> = lines.map(|l| l.split('\t').collect()).collect();
    ensure(golden.len() == measured.len(), || "golden row count".into())?;
    let mut total_deviation = 0i64;
    for ((message, field, bytes), row) in measured.iter().zip(&golden) {
        let parse = |i: usize| row[i].parse::<i64>().map_err(err);
        ensure(
            row.len() == 5 && row[0] == *message && row[1] == *field,
            || format!("golden row {row:?}"),
        )?;
        let (encoded, reported, deviation) = (parse(2)?, parse(3)?, parse(4)?);
        ensure(encoded == *bytes as i64, || {
            format!("{message}.{field}: {bytes} bytes, golden {encoded}")
        })?;
        ensure(deviation == encoded - reported, || {
            format!("{message}.{field}: deviation column")
        })?;
        total_deviation += deviation.abs();
    }
    Ok(format!(
        "request {req_sizes:?}, response {resp_sizes:?}, total deviation from reported sizes {total_deviation}"
    ))
}

// ---------------------------------------------------------------------------

struct Criterion {
    name: &'static str,
    run: fn() -> Verdict,
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        name: "end-to-end",
        run: end_to_end,
    },
    Criterion {
        name: "double-dipping",
        run: double_dipping,
    },
    Criterion {
        name: "revocation",
        run: revocation,
    },
    Criterion {
        name: "audit-soundness",
        run: audit_soundness,
    },
    Criterion {
        name: "sec-kit",
        run: sec_kit,
    },
    Criterion {
        name: "ind-ent-baselines",
        run: baselines,
    },
    Criterion {
        name: "homomorphic-identity",
        run: homomorphic_identity,
    },
    Criterion {
        name: "scaling",
        run: scaling,
    },
    Criterion {
        name: "card-op-budget",
        run: card_budget,
    },
    Criterion {
        name: "message-sizes",
        run: message_sizes,
    },
];

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        for c in CRITERIA {
            println!("{}: test", c.name);
        }
        return;
    }
    let filters: Vec<&String> = args.iter().filter(|a| !a.starts_with('-')).collect();
    let selected: Vec<&Criterion> = CRITERIA
        .iter()
        .filter(|c| filters.is_empty() || filters.iter().any(|f| c.name.contains(f.as_str())))
        .collect();
    let mut failed = 0;
    for c in &selected {
        let start = Instant::now();
        let verdict = (c.run)();
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS {:<22} {detail} [{secs:.1}s]", c.name),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:<22} {detail} [{secs:.1}s]", c.name);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        selected.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
