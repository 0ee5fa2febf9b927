//! Scenario-driven front end: runs the protocols and attacks, emits NDJSON
//! event logs, spacetime SVG diagrams, per-tick work profiles, and the
//! acceptance report.
//!
//! Exit codes: 0 on protocol accept / suite pass, 1 on reject / fail, 2 on
//! configuration errors.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use lightlock_core::acceptance;
use lightlock_core::attacks::{
    binding_attack_suite, classical_copy_attack, denial_privacy_attack, epr_attack,
    intercept_resend_attack, line_instance, line_spoofers, AttackReport,
};
use lightlock_core::fixed::Fix;
use lightlock_core::pc::{
    read_opening, read_rho, reveal_phase, run_commit, write_opening, write_rho, RevealRequest,
};
use lightlock_core::pc_opt::{
    mesh_points, per_tick_work_profile, reveal_optimized, run_optimized_commit,
};
use lightlock_core::pv::{run_singleton_pv, PvVariant};
use lightlock_core::scenario::{PointSpec, ScenarioConfig};
use lightlock_core::sim::{Engine, ProfileGrid};
use lightlock_core::svg::spacetime_svg;
use lightlock_core::zkpv::{zk_position_verify, ProverMode};

const EXIT_ACCEPT: i32 = 0;
const EXIT_REJECT: i32 = 1;
const EXIT_CONFIG: i32 = 2;

#[derive(Parser)]
#[command(name = "lightlock", version, about = "Deterministic spacetime protocol simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Singleton position verification (f-BB84)
    Pv {
        #[command(subcommand)]
        cmd: PvCmd,
    },
    /// Encrypt-then-verify position commitments
    Pc {
        #[command(subcommand)]
        cmd: PcCmd,
    },
    /// Optimized tick-driven position commitments
    #[command(name = "pc-opt")]
    PcOpt {
        #[command(subcommand)]
        cmd: PcOptCmd,
    },
    /// Zero-knowledge position verification
    Zkpv {
        #[command(subcommand)]
        cmd: ZkpvCmd,
    },
    /// Adversary harness
    Attack {
        #[command(subcommand)]
        cmd: AttackCmd,
    },
    /// Reports
    Report {
        #[command(subcommand)]
        cmd: ReportCmd,
    },
    /// Print the scenario JSON schema
    Schema,
}

#[derive(Subcommand)]
enum PvCmd {
    /// Run one protocol instance with an honest prover
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Write the NDJSON event log here
        #[arg(long)]
        log: Option<PathBuf>,
        /// Write a spacetime diagram here
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PcCmd {
    /// Run the commit phase and store the commitment state
    Commit {
        #[arg(long)]
        scenario: PathBuf,
        /// Output path for the commitment state (.pcmt)
        #[arg(long)]
        out: PathBuf,
        /// Output path for the prover's key opening
        #[arg(long)]
        opening: Option<PathBuf>,
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Reveal a stored commitment at a claimed point
    Reveal {
        #[arg(long)]
        rho: PathBuf,
        /// Index of the claimed point in S
        #[arg(long)]
        alpha: u32,
        #[arg(long)]
        opening: PathBuf,
    },
}

#[derive(Subcommand)]
enum PcOptCmd {
    /// Run the optimized scheme over a tick grid and self-check the reveal
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Override the number of challenge ticks
        #[arg(long)]
        ticks: Option<u64>,
        /// Override the tick spacing (rational, e.g. "1/2")
        #[arg(long)]
        delta: Option<String>,
        /// Mesh point the prover occupies (defaults to the middle one)
        #[arg(long)]
        mesh_index: Option<usize>,
        /// Write the per-tick work profile CSV here
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ZkpvCmd {
    /// Commit, compile the reveal statement, prove and verify
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Region file: a JSON array of points (defaults to the scenario's R)
        #[arg(long)]
        region: Option<PathBuf>,
        #[arg(long)]
        reps: Option<usize>,
        /// Write the verdict JSON here
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        log: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum AttackCmd {
    /// Run a named attack experiment
    Run {
        /// classical-copy | intercept-resend | epr-plain | epr-fbb84 |
        /// denial-privacy | binding-suite
        #[arg(long)]
        name: String,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write the report JSON here
        #[arg(long)]
        report: Option<PathBuf>,
        /// Parallelize independent trials over this many threads
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Subcommand)]
enum ReportCmd {
    /// Run the acceptance criteria and print a pass/fail table
    Acceptance {
        /// Run a single criterion
        #[arg(long)]
        only: Option<u32>,
        /// Write the structured results here
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

struct Failure {
    code: i32,
    message: String,
}

fn config_err(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_CONFIG, message: message.into() }
}

fn read_config(path: &Path) -> Result<ScenarioConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    ScenarioConfig::from_json(&text).map_err(|e| config_err(e.to_string()))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes)
        .map_err(|e| config_err(format!("cannot write {}: {e}", path.display())))
}

fn emit_outputs(
    engine: &Engine,
    log: &Option<PathBuf>,
    svg: &Option<PathBuf>,
) -> Result<(), Failure> {
    if let Some(path) = log {
        write_file(path, engine.ndjson().as_bytes())?;
    }
    if let Some(path) = svg {
        let positions: Vec<_> =
            (0..engine.n_parties()).map(|i| engine.position(i as u16).clone()).collect();
        write_file(path, spacetime_svg(engine.records(), &positions, 0).as_bytes())?;
    }
    Ok(())
}

fn cmd_pv(scenario: &Path, log: Option<PathBuf>, svg: Option<PathBuf>) -> Result<i32, Failure> {
    let cfg = read_config(scenario)?;
    let inst = cfg.to_pv_instance().map_err(|e| config_err(e.to_string()))?;
    let run = run_singleton_pv(&inst, cfg.seed, PvVariant::FBb84, true)
        .map_err(|e| config_err(e.to_string()))?;
    emit_outputs(&run.engine, &log, &svg)?;
    println!(
        "pv: {} ({} of {} rounds verified)",
        if run.accept { "accept" } else { "reject" },
        run.round_ok.iter().filter(|&&b| b).count(),
        run.round_ok.len()
    );
    Ok(if run.accept { EXIT_ACCEPT } else { EXIT_REJECT })
}

fn cmd_pc_commit(
    scenario: &Path,
    out: &Path,
    opening_path: Option<PathBuf>,
    log: Option<PathBuf>,
    svg: Option<PathBuf>,
) -> Result<i32, Failure> {
    let cfg = read_config(scenario)?;
    let sc = cfg.to_pc_scenario().map_err(|e| config_err(e.to_string()))?;
    let alpha = cfg.alpha.unwrap_or(0);
    let run = run_commit(&sc, Some(alpha), None, &[]).map_err(|e| config_err(e.to_string()))?;
    emit_outputs(&run.engine, &log, &svg)?;
    write_file(out, &write_rho(&sc, &run.rho))?;
    if let Some(path) = opening_path {
        let opening = run.opening.clone().ok_or_else(|| config_err("prover produced no opening"))?;
        write_file(&path, &write_opening(&opening))?;
    }
    println!(
        "pc commit: stored {} transcript entries for |S| = {} at {}",
        run.rho.entries.len(),
        sc.s_points.len(),
        out.display()
    );
    Ok(EXIT_ACCEPT)
}

fn cmd_pc_reveal(rho_path: &Path, alpha: u32, opening_path: &Path) -> Result<i32, Failure> {
    let bytes = std::fs::read(rho_path)
        .map_err(|e| config_err(format!("cannot read {}: {e}", rho_path.display())))?;
    let (scenario, rho) = read_rho(&bytes).map_err(|e| config_err(e.to_string()))?;
    let opening_bytes = std::fs::read(opening_path)
        .map_err(|e| config_err(format!("cannot read {}: {e}", opening_path.display())))?;
    let opening = read_opening(&opening_bytes).map_err(|e| config_err(e.to_string()))?;
    let outcome = reveal_phase(&scenario, &rho, &RevealRequest { alpha, opening });
    println!(
        "pc reveal at alpha={alpha}: {} (accepting set {:?})",
        if outcome.accept { "accept" } else { "reject" },
        outcome.accept_set
    );
    Ok(if outcome.accept { EXIT_ACCEPT } else { EXIT_REJECT })
}

fn cmd_pc_opt(
    scenario: &Path,
    ticks: Option<u64>,
    delta: Option<String>,
    mesh_index: Option<usize>,
    profile: Option<PathBuf>,
    log: Option<PathBuf>,
    svg: Option<PathBuf>,
) -> Result<i32, Failure> {
    let mut cfg = read_config(scenario)?;
    if let Some(t) = ticks {
        cfg.ticks = Some(t);
    }
    if let Some(d) = delta {
        cfg.delta = Some(lightlock_core::scenario::RatSpec::Str(d));
    }
    let sc = cfg.to_pc_opt_scenario().map_err(|e| config_err(e.to_string()))?;
    let mesh = mesh_points(&sc).map_err(|e| config_err(e.to_string()))?;
    if mesh.is_empty() {
        return Err(config_err("tick grid induces no mesh points"));
    }
    let idx = mesh_index.unwrap_or(mesh.len() / 2);
    if idx >= mesh.len() {
        return Err(config_err(format!("mesh index {idx} out of range ({} points)", mesh.len())));
    }
    let run = run_optimized_commit(&sc, &mesh, idx).map_err(|e| config_err(e.to_string()))?;
    emit_outputs(&run.engine, &log, &svg)?;
    if let Some(path) = profile {
        let grid = ProfileGrid {
            start: Fix::from_rational(&sc.schedule.t_start),
            delta: Fix::from_rational(&sc.schedule.delta),
        };
        let work = per_tick_work_profile(run.engine.records(), grid, sc.n, sc.n);
        write_file(&path, work.to_csv().as_bytes())?;
    }
    let opening = run.opening.clone().ok_or_else(|| config_err("prover produced no opening"))?;
    let outcome = reveal_optimized(&sc, &mesh, &run.rho, idx, &opening);
    println!(
        "pc-opt: {} mesh points, prover at #{idx} ({}, t={}), self-reveal {}",
        mesh.len(),
        mesh[idx]
            .point
            .pos
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(","),
        mesh[idx].point.t,
        if outcome.accept { "accept" } else { "reject" }
    );
    Ok(if outcome.accept { EXIT_ACCEPT } else { EXIT_REJECT })
}

fn parse_region_file(path: &Path) -> Result<Vec<PointSpec>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    // Either a bare array of points or an object with an "R" key.
    if let Ok(points) = serde_json::from_str::<Vec<PointSpec>>(&text) {
        return Ok(points);
    }
    #[derive(serde::Deserialize)]
    struct Wrapper {
        #[serde(rename = "R")]
        r: Vec<PointSpec>,
    }
    serde_json::from_str::<Wrapper>(&text)
        .map(|w| w.r)
        .map_err(|e| config_err(format!("region file: {e}")))
}

fn cmd_zkpv(
    scenario: &Path,
    region: Option<PathBuf>,
    reps: Option<usize>,
    out: Option<PathBuf>,
    log: Option<PathBuf>,
) -> Result<i32, Failure> {
    let mut cfg = read_config(scenario)?;
    if let Some(path) = region {
        cfg.r_region = Some(parse_region_file(&path)?);
    }
    let sc = cfg.to_pc_scenario().map_err(|e| config_err(e.to_string()))?;
    let region_idx = cfg.region_indices(&sc).map_err(|e| config_err(e.to_string()))?;
    let alpha = cfg.alpha.unwrap_or(region_idx[0]);
    let reps = reps.or(cfg.reps).unwrap_or(40);
    let (verdict, run) =
        zk_position_verify(&sc, alpha, &region_idx, reps, 0, ProverMode::Honest, &[])
            .map_err(|e| config_err(e.to_string()))?;
    if let Some(path) = log {
        write_file(&path, run.engine.ndjson().as_bytes())?;
    }
    let summary = serde_json::json!({
        "accept": verdict.accept,
        "alpha": alpha,
        "region": region_idx,
        "reps": reps,
        "and_gates": verdict.and_gates,
        "statement_hash": format!("{:016x}", verdict.statement_hash),
    });
    let text = serde_json::to_string_pretty(&summary).expect("verdict serializes");
    if let Some(path) = out {
        write_file(&path, text.as_bytes())?;
    }
    println!("{text}");
    Ok(if verdict.accept { EXIT_ACCEPT } else { EXIT_REJECT })
}

/// Splits trials across worker threads; each chunk advances the seed so the
/// union of trial seeds is identical for every job count.
fn parallel_attack<F>(trials: u64, seed: u64, jobs: usize, f: F) -> Result<(u64, u64), Failure>
where
    F: Fn(u64, u64) -> Result<(u64, u64), Failure> + Sync,
{
    let jobs = jobs.max(1).min(trials.max(1) as usize);
    let chunk = trials.div_ceil(jobs as u64);
    let results = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for j in 0..jobs as u64 {
            let start = j * chunk;
            let count = chunk.min(trials.saturating_sub(start));
            let f = &f;
            handles.push(scope.spawn(move || f(count, seed + start)));
        }
        handles.into_iter().map(|h| h.join().expect("worker")).collect::<Vec<_>>()
    });
    let mut successes = 0;
    let mut total = 0;
    for r in results {
        let (s, t) = r?;
        successes += s;
        total += t;
    }
    Ok((successes, total))
}

fn cmd_attack(
    name: &str,
    trials: u64,
    seed: u64,
    report_path: Option<PathBuf>,
    jobs: usize,
) -> Result<i32, Failure> {
    let report: serde_json::Value = match name {
        "classical-copy" => {
            let inst = line_instance(32, 20);
            let (s, t) = parallel_attack(trials, seed, jobs, |n, sd| {
                classical_copy_attack(&inst, &line_spoofers(), n, sd)
                    .map(|r| (r.successes, r.trials))
                    .map_err(|e| config_err(e.to_string()))
            })?;
            serde_json::to_value(AttackReport::new("classical-copy", s, t)).unwrap()
        }
        "intercept-resend" => {
            let inst = line_instance(32, 20);
            let (s, t) = parallel_attack(trials, seed, jobs, |n, sd| {
                intercept_resend_attack(&inst, &line_spoofers(), n, sd)
                    .map(|(round, _)| (round.successes, round.trials))
                    .map_err(|e| config_err(e.to_string()))
            })?;
            serde_json::to_value(AttackReport::new("intercept-resend-round", s, t)).unwrap()
        }
        "epr-plain" => {
            let inst = line_instance(1, 1);
            let (s, t) = parallel_attack(trials, seed, jobs, |n, sd| {
                epr_attack(&inst, PvVariant::PlainBb84, &line_spoofers(), n, sd)
                    .map(|r| (r.successes, r.trials))
                    .map_err(|e| config_err(e.to_string()))
            })?;
            serde_json::to_value(AttackReport::new("epr-plain-bb84", s, t)).unwrap()
        }
        "epr-fbb84" => {
            let inst = line_instance(32, 1);
            let (s, t) = parallel_attack(trials, seed, jobs, |n, sd| {
                epr_attack(&inst, PvVariant::FBb84, &line_spoofers(), n, sd)
                    .map(|r| (r.successes, r.trials))
                    .map_err(|e| config_err(e.to_string()))
            })?;
            serde_json::to_value(AttackReport::new("epr-vs-fbb84", s, t)).unwrap()
        }
        "denial-privacy" => {
            let sc = toy_commit_scenario(seed);
            let report = denial_privacy_attack(&sc, &[0, 1, 2, 3], &[1, 3], 8, trials)
                .map_err(|e| config_err(e.to_string()))?;
            serde_json::to_value(report).unwrap()
        }
        "binding-suite" => {
            let sc = toy_commit_scenario(seed);
            let rows = binding_attack_suite(
                &sc,
                &[lightlock_core::sim::rats(&[1]), lightlock_core::sim::rats(&[5])],
                1,
                trials.min(50),
                trials,
                1 << 20,
            )
            .map_err(|e| config_err(e.to_string()))?;
            serde_json::json!({ "name": "binding-suite", "rows": rows })
        }
        other => {
            return Err(config_err(format!(
                "unknown attack '{other}' (classical-copy | intercept-resend | epr-plain | \
                 epr-fbb84 | denial-privacy | binding-suite)"
            )))
        }
    };
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    if let Some(path) = report_path {
        write_file(&path, text.as_bytes())?;
    }
    println!("{text}");
    Ok(EXIT_ACCEPT)
}

fn toy_commit_scenario(seed: u64) -> lightlock_core::pc::PcScenario {
    use lightlock_core::geometry::rat_int;
    use lightlock_core::sim::rats;
    lightlock_core::pc::PcScenario::new(
        1,
        vec![rats(&[0]), rats(&[6])],
        vec![
            lightlock_core::SpacetimePoint::new(rats(&[2]), rat_int(10)),
            lightlock_core::SpacetimePoint::new(rats(&[3]), rat_int(10)),
            lightlock_core::SpacetimePoint::new(rats(&[4]), rat_int(10)),
            lightlock_core::SpacetimePoint::new(rats(&[3]), rat_int(13)),
        ],
        lightlock_core::pc::PcParams {
            n: 8,
            rounds: 1,
            kappa: 8,
            lambda_com: 4,
            payload_bits: 1,
        },
        seed,
    )
    .expect("toy scenario valid")
}

fn cmd_report(only: Option<u32>, json: Option<PathBuf>) -> Result<i32, Failure> {
    let results = match only {
        Some(id) => {
            if !(1..=12).contains(&id) {
                return Err(config_err(format!("criterion {id} out of range 1..=12")));
            }
            vec![acceptance::run_criterion(id)]
        }
        None => acceptance::run_all(),
    };
    for r in &results {
        println!(
            "criterion {:2} [{}] {:<35} ({:6.2}s / budget {:.0}s) {}",
            r.id,
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.seconds,
            r.budget_seconds,
            r.details
        );
    }
    if let Some(path) = json {
        write_file(&path, serde_json::to_string_pretty(&results).unwrap().as_bytes())?;
    }
    let all_pass = results.iter().all(|r| r.pass);
    println!(
        "acceptance: {} of {} criteria passed",
        results.iter().filter(|r| r.pass).count(),
        results.len()
    );
    Ok(if all_pass { EXIT_ACCEPT } else { EXIT_REJECT })
}

fn dispatch(cli: Cli) -> Result<i32, Failure> {
    match cli.cmd {
        Cmd::Pv { cmd: PvCmd::Run { scenario, log, svg } } => cmd_pv(&scenario, log, svg),
        Cmd::Pc { cmd } => match cmd {
            PcCmd::Commit { scenario, out, opening, log, svg } => {
                cmd_pc_commit(&scenario, &out, opening, log, svg)
            }
            PcCmd::Reveal { rho, alpha, opening } => cmd_pc_reveal(&rho, alpha, &opening),
        },
        Cmd::PcOpt { cmd: PcOptCmd::Run { scenario, ticks, delta, mesh_index, profile, log, svg } } => {
            cmd_pc_opt(&scenario, ticks, delta, mesh_index, profile, log, svg)
        }
        Cmd::Zkpv { cmd: ZkpvCmd::Run { scenario, region, reps, out, log } } => {
            cmd_zkpv(&scenario, region, reps, out, log)
        }
        Cmd::Attack { cmd: AttackCmd::Run { name, trials, seed, report, jobs } } => {
            cmd_attack(&name, trials, seed, report, jobs)
        }
        Cmd::Report { cmd: ReportCmd::Acceptance { only, json } } => cmd_report(only, json),
        Cmd::Schema => {
            println!("{}", include_str!("../schema/scenario.schema.json"));
            Ok(EXIT_ACCEPT)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    };
    std::process::exit(code);
}
