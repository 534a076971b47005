//! Argument parsing and the subcommands.

use std::path::PathBuf;
use std::sync::Arc;

use aidkit::games::kit::{adversary_names, run_named, KitScheme};
use aidkit::games::{Experiment, TrialSummary};
use aidkit::protocol::{AidScheme, CardSystem, PhoneSystem, SystemParams};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bench::{compute_fit, run_bench, BenchConfig, BENCH_HEADER, DEFAULT_THROUGHPUT};
use crate::error::{Result, SimError};
use crate::scenario::{EntitlementDist, ScenarioConfig, SystemKind, DEFAULT_BL_SIZES};
use crate::sim::{merge_logs, stored_system, verdict_text, Layout, Simulation};

#[derive(Debug, Parser)]
#[command(
    name = "aidsim",
    version,
    about = "Simulate aid distribution with card or phone tokens"
)]
pub struct Cli {
    /// Token system. Required by setup, bench and game; other commands
    /// read it from the scenario and reject a mismatch.
    #[arg(long, global = true, value_enum)]
    pub system: Option<SystemKind>,
    /// RNG seed. Required by setup.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Blocklist sizes for bench sweeps, comma separated.
    #[arg(long = "bl-size", global = true, value_delimiter = ',')]
    pub bl_size: Vec<usize>,
    /// Modelled channel throughput in bytes per second.
    #[arg(long, global = true, default_value_t = DEFAULT_THROUGHPUT)]
    pub throughput: f64,
    #[arg(
        long = "out-dir",
        global = true,
        env = "AIDSIM_OUT_DIR",
        default_value = "aidsim-out"
    )]
    pub out_dir: PathBuf,
    /// Print a JSON document instead of a tab-separated table.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create the scenario and the registration station's keys.
    Setup(SetupArgs),
    /// Register every household with one token.
    Register,
    /// Copy each household's token until it holds the given number.
    Clone {
        /// Defaults to the scenario's cards per household.
        #[arg(long)]
        cards: Option<u32>,
    },
    /// Revoke households from the next distribution on. Without ids, the
    /// scenario's per-epoch quota is drawn at random.
    Revoke {
        #[arg(long = "household")]
        households: Vec<u32>,
    },
    /// Run one distribution round with every token.
    Distribute {
        #[arg(long)]
        epoch: u64,
    },
    /// Aggregate an epoch's log and verify the audit.
    Audit {
        #[arg(long)]
        epoch: u64,
        /// Verify the audit file already on disk instead of generating one.
        #[arg(long)]
        verify_only: bool,
    },
    /// Merge the tag sets of several station logs and report duplicates.
    MergeTags {
        #[arg(long)]
        epoch: u64,
        #[arg(required = true)]
        logs: Vec<PathBuf>,
    },
    /// Time showup and verification over a sweep of blocklist sizes.
    Bench {
        #[arg(long, default_value_t = 5)]
        reps: usize,
    },
    /// Run a named security experiment against a named adversary.
    Game(GameArgs),
}

#[derive(Debug, Args)]
pub struct SetupArgs {
    #[arg(long, default_value_t = 10)]
    pub households: u32,
    #[arg(long, default_value_t = 1)]
    pub cards_per_household: u32,
    #[arg(long, default_value_t = 1)]
    pub ent_min: u32,
    #[arg(long, default_value_t = 5)]
    pub ent_max: u32,
    #[arg(long, default_value_t = 1)]
    pub epochs: u32,
    #[arg(long, default_value_t = 0)]
    pub revocations_per_epoch: u32,
}

#[derive(Debug, Args)]
pub struct GameArgs {
    /// ind, aud, ent, sec or rev.
    #[arg(long)]
    pub experiment: String,
    /// Adversary name, or `all`.
    #[arg(long, default_value = "all")]
    pub adversary: String,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
}

/// What a command prints: a tab-separated table or a JSON document.
#[derive(Debug, Clone)]
pub struct Output {
    pub table: String,
    pub json: Value,
    /// One-line summary for stderr.
    pub note: Option<String>,
}

impl Output {
    fn new(table: String, json: Value) -> Self {
        Output {
            table,
            json,
            note: None,
        }
    }

    fn with_note(mut self, note: String) -> Self {
        self.note = Some(note);
        self
    }

    pub fn render(&self, as_json: bool) -> String {
        if as_json {
            let mut s = serde_json::to_string_pretty(&self.json).expect("output serializes");
            s.push('\n');
            s
        } else {
            self.table.clone()
        }
    }
}

fn ensure_dir(layout: &Layout) -> Result<()> {
    std::fs::create_dir_all(&layout.dir).map_err(|source| SimError::Io {
        path: layout.dir.clone(),
        source,
    })
}

fn system_for(cli: &Cli, command: &str) -> Result<SystemKind> {
    cli.system
        .ok_or_else(|| SimError::Usage(format!("{command} needs --system card|phone")))
}

/// System of an existing output directory, checked against `--system`.
fn stored_system_checked(cli: &Cli, layout: &Layout) -> Result<SystemKind> {
    let stored = stored_system(layout)?;
    match cli.system {
        Some(s) if s != stored => Err(SimError::Usage(format!(
            "--system {s} does not match the {stored} scenario in {}",
            layout.dir.display()
        ))),
        _ => Ok(stored),
    }
}

pub fn run(cli: &Cli) -> Result<Output> {
    let layout = Layout::new(&cli.out_dir);
    match &cli.command {
        Command::Setup(args) => {
            let system = system_for(cli, "setup")?;
            let seed = cli
                .seed
                .ok_or_else(|| SimError::Usage("setup needs --seed".into()))?;
            let scenario = ScenarioConfig {
                cards_per_household: args.cards_per_household,
                entitlement: EntitlementDist::Uniform {
                    min: args.ent_min,
                    max: args.ent_max,
                },
                epochs: args.epochs,
                revocations_per_epoch: args.revocations_per_epoch,
                bench_bl_sizes: if cli.bl_size.is_empty() {
                    DEFAULT_BL_SIZES.to_vec()
                } else {
                    cli.bl_size.clone()
                },
                ..ScenarioConfig::new(system, args.households, seed)
            };
            ensure_dir(&layout)?;
            match system {
                SystemKind::Card => cmd_setup::<CardSystem>(&layout, scenario),
                SystemKind::Phone => cmd_setup::<PhoneSystem>(&layout, scenario),
            }
        }
        Command::Register => dispatch(cli, &layout, Phase::Register),
        Command::Clone { cards } => dispatch(cli, &layout, Phase::Clone(*cards)),
        Command::Revoke { households } => dispatch(cli, &layout, Phase::Revoke(households.clone())),
        Command::Distribute { epoch } => dispatch(cli, &layout, Phase::Distribute(*epoch)),
        Command::Audit { epoch, verify_only } => {
            dispatch(cli, &layout, Phase::Audit(*epoch, *verify_only))
        }
        Command::MergeTags { epoch, logs } => {
            let system = match cli.system {
                Some(s) => s,
                None => stored_system(&layout)?,
            };
            let report = match system {
                SystemKind::Card => merge_logs::<CardSystem>(logs, system, *epoch)?,
                SystemKind::Phone => merge_logs::<PhoneSystem>(logs, system, *epoch)?,
            };
            let dups: Vec<(String, usize)> = report
                .duplicates
                .iter()
                .map(|(tag, n)| (hex::encode(tag), *n))
                .collect();
            let mut table = String::from("epoch\tinputs\tunion\tduplicated_tags\n");
            table.push_str(&format!(
                "{epoch}\t{}\t{}\t{}\n",
                logs.len(),
                report.union.len(),
                dups.len()
            ));
            if !dups.is_empty() {
                table.push_str("tag\tstations\n");
                for (tag, n) in &dups {
                    table.push_str(&format!("{tag}\t{n}\n"));
                }
            }
            let json = json!({
                "epoch": epoch,
                "inputs": logs.len(),
                "union": report.union.len(),
                "duplicates": dups.iter().map(|(t, n)| json!({"tag": t, "stations": n})).collect::<Vec<_>>(),
            });
            Ok(Output::new(table, json))
        }
        Command::Bench { reps } => {
            let system = system_for(cli, "bench")?;
            let config = BenchConfig {
                bl_sizes: if cli.bl_size.is_empty() {
                    DEFAULT_BL_SIZES.to_vec()
                } else {
                    cli.bl_size.clone()
                },
                throughput: cli.throughput,
                reps: *reps,
                seed: cli.seed.unwrap_or(0),
            };
            match system {
                SystemKind::Card => cmd_bench::<CardSystem>(system, &config),
                SystemKind::Phone => cmd_bench::<PhoneSystem>(system, &config),
            }
        }
        Command::Game(args) => {
            let system = system_for(cli, "game")?;
            let seed = cli.seed.unwrap_or(0);
            match system {
                SystemKind::Card => cmd_game::<CardSystem>(args, seed),
                SystemKind::Phone => cmd_game::<PhoneSystem>(args, seed),
            }
        }
    }
}

enum Phase {
    Register,
    Clone(Option<u32>),
    Revoke(Vec<u32>),
    Distribute(u64),
    Audit(u64, bool),
}

fn dispatch(cli: &Cli, layout: &Layout, phase: Phase) -> Result<Output> {
    match stored_system_checked(cli, layout)? {
        SystemKind::Card => run_phase::<CardSystem>(layout, phase),
        SystemKind::Phone => run_phase::<PhoneSystem>(layout, phase),
    }
}

fn cmd_setup<S: AidScheme>(layout: &Layout, scenario: ScenarioConfig) -> Result<Output> {
    let sim = Simulation::<S>::setup(scenario)?;
    sim.save_setup(layout)?;
    let s = &sim.scenario;
    let table = format!(
        "system\thouseholds\tcards_per_household\tepochs\trevocations_per_epoch\tseed\n{}\t{}\t{}\t{}\t{}\t{}\n",
        s.system, s.households, s.cards_per_household, s.epochs, s.revocations_per_epoch, s.seed
    );
    let json = serde_json::to_value(s).expect("scenario serializes");
    Ok(Output::new(table, json))
}

fn run_phase<S: AidScheme>(layout: &Layout, phase: Phase) -> Result<Output> {
    let mut sim = Simulation::<S>::load_setup(layout)?;
    match phase {
        Phase::Register => {
            sim.register()?;
            sim.save_households(layout)?;
            let total: u64 = sim.households().iter().map(|h| u64::from(h.ent)).sum();
            let table = format!(
                "households\ttotal_entitlement\n{}\t{total}\n",
                sim.households().len()
            );
            let json = json!({"households": sim.households().len(), "total_entitlement": total});
            Ok(Output::new(table, json))
        }
        Phase::Clone(cards) => {
            sim.require_households(layout)?;
            let cards = cards.unwrap_or(sim.scenario.cards_per_household);
            if cards == 0 {
                return Err(SimError::Usage("--cards must be at least 1".into()));
            }
            let added = sim.clone_tokens(cards)?;
            sim.save_households(layout)?;
            let table = format!("cards_per_household\tcopies_made\n{cards}\t{added}\n");
            Ok(Output::new(
                table,
                json!({"cards_per_household": cards, "copies_made": added}),
            ))
        }
        Phase::Revoke(ids) => {
            sim.require_households(layout)?;
            sim.load_blocklist(layout)?;
            let newly = if ids.is_empty() {
                sim.revoke_scheduled()?
            } else {
                sim.revoke(&ids)?
            };
            sim.save_blocklist(layout)?;
            let mut table = String::from("household\n");
            for id in &newly {
                table.push_str(&format!("{id}\n"));
            }
            let json = json!({"revoked": newly, "blocklist_len": sim.blocklist().len()});
            Ok(Output::new(table, json).with_note(format!(
                "revoked {} households; blocklist holds {}",
                newly.len(),
                sim.blocklist().len()
            )))
        }
        Phase::Distribute(epoch) => {
            sim.require_households(layout)?;
            sim.load_blocklist(layout)?;
            sim.load_distributions(layout)?;
            let report = sim.distribute(epoch)?;
            sim.save_distribution(layout, &report)?;
            sim.save_households(layout)?;
            let t = report.totals();
            let note = format!(
                "epoch {epoch}: {} accepted, {} duplicate, {} blocked, {} invalid",
                t.accepted, t.duplicate, t.blocked, t.invalid
            );
            let json = json!({
                "epoch": epoch,
                "blocklist_len": report.blocklist_len,
                "totals": t,
                "households": report.households,
            });
            Ok(Output::new(report.to_tsv(), json).with_note(note))
        }
        Phase::Audit(epoch, verify_only) => {
            sim.require_audit_inputs(layout, epoch)?;
            let report = if verify_only {
                let claim = sim.load_audit_claim(layout, epoch)?;
                let bl = sim.epoch_blocklist(epoch).expect("loaded above").clone();
                sim.verify_claim(epoch, &claim, &bl)
            } else {
                let (report, claim) = sim.audit(epoch)?;
                sim.save_audit(layout, &report, &claim)?;
                report
            };
            let json = json!({
                "epoch": epoch,
                "records": report.records,
                "ent_sum": report.ent_sum,
                "verdict": verdict_text(&report.verdict),
            });
            let out = Output::new(report.to_tsv(), json);
            match &report.verdict {
                Ok(()) => Ok(out),
                Err(e) => Err(SimError::Verification(format!(
                    "audit of epoch {epoch} rejected: {e:?}"
                ))),
            }
        }
    }
}

#[derive(Serialize)]
struct BenchDoc<'a> {
    system: SystemKind,
    config: &'a BenchConfig,
    rows: &'a [crate::bench::BenchRow],
    fit: Option<crate::bench::LinearFit>,
}

fn cmd_bench<S: KitScheme>(system: SystemKind, config: &BenchConfig) -> Result<Output> {
    let rows = run_bench::<S>(config)?;
    let fit = compute_fit(&rows);
    let mut table = format!("{BENCH_HEADER}\n");
    for r in &rows {
        table.push_str(&format!("{r}\n"));
    }
    let json = serde_json::to_value(BenchDoc {
        system,
        config,
        rows: &rows,
        fit,
    })
    .expect("bench serializes");
    let out = Output::new(table, json);
    Ok(match fit {
        Some(f) => out.with_note(format!(
            "showup+verify ~ {:.4} ms/entry * |BL| + {:.3} ms, R^2 = {:.4}",
            f.slope, f.intercept, f.r_squared
        )),
        None => out,
    })
}

fn summary_json(s: &TrialSummary) -> Value {
    json!({
        "experiment": s.experiment.name(),
        "config": s.config.name(),
        "adversary": s.adversary,
        "trials": s.trials,
        "wins": s.wins,
        "guards": s.guards,
        "win_rate": s.win_rate(),
        "seed_start": s.seeds.start,
        "seed_end": s.seeds.end,
    })
}

fn cmd_game<S: KitScheme>(args: &GameArgs, seed: u64) -> Result<Output> {
    let experiment = Experiment::parse(&args.experiment)
        .ok_or_else(|| SimError::Usage(format!("unknown experiment {:?}", args.experiment)))?;
    let names = if args.adversary == "all" {
        adversary_names(experiment)
    } else {
        vec![args.adversary.as_str()]
    };
    let params = Arc::new(SystemParams::default());
    let seeds = seed..seed.saturating_add(args.trials);
    let mut summaries = Vec::new();
    for name in names {
        let summary =
            run_named::<S>(&params, experiment, name, seeds.clone()).ok_or_else(|| {
                SimError::Usage(format!(
                    "no adversary {name:?} for {}; known: {}",
                    experiment.name(),
                    adversary_names(experiment).join(", ")
                ))
            })?;
        summaries.push(summary);
    }
    let mut table = format!("{}\n", TrialSummary::TSV_HEADER);
    for s in &summaries {
        table.push_str(&format!("{s}\n"));
    }
    let json = Value::Array(summaries.iter().map(summary_json).collect());
    Ok(Output::new(table, json))
}
