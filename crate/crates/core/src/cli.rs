//! Command-line interface: lookup-table generation, single sessions with
//! trace output, Monte Carlo sweeps, the analytic tradeoff curve, and
//! table inspection. Every writing command drops a `manifest.toml` beside
//! its outputs; feeding that file back as `--config` reproduces the run.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::channel::{snap_snr_down, BlerOracle, Snr, NR_VALUES};
use crate::config::{Config, GenMethod, ManifestMeta, RunManifest};
use crate::lut::{
    brute_force_optimal, initialize_exploratory, InitConfig, InitSession, Lut, LutError, LutKey,
};
use crate::sim::{
    run_session, run_sweep, sweep_to_csv, trace_to_csv, tradeoff_curve, tradeoff_to_csv,
    ServiceMode, SimError, SweepConfig, TradeoffConfig,
};
use crate::strategy::StrategyKind;

/// Failures grouped by exit code: 1 usage, 2 data, 3 non-termination.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    NonTermination(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::NonTermination(_) => 3,
        }
    }
}

fn map_sim_err(e: SimError) -> CliError {
    match &e {
        SimError::Config { .. } => CliError::Usage(e.to_string()),
        SimError::NonTermination { .. } => CliError::NonTermination(e.to_string()),
        SimError::Cell { source, .. } => match source.as_ref() {
            SimError::NonTermination { .. } => CliError::NonTermination(e.to_string()),
            SimError::Config { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        },
        _ => CliError::Data(e.to_string()),
    }
}

fn map_lut_err(e: LutError) -> CliError {
    match &e {
        LutError::InvalidFallback(_) => CliError::Usage(e.to_string()),
        _ => CliError::Data(e.to_string()),
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "npusch-sim",
    version,
    about = "NB-IoT NPUSCH uplink link adaptation simulator"
)]
struct Cli {
    /// Configuration file (TOML); a run manifest works too.
    #[arg(long, global = true, env = "NPUSCH_SIM_CONFIG")]
    config: Option<PathBuf>,
    /// Base random seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel commands (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Directory output files are written into.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a lookup table of minimum-resource assignments.
    GenLut {
        /// Generation method: explore or brute-force.
        #[arg(long)]
        method: Option<String>,
        /// Output table file.
        #[arg(long, default_value = "lut.csv")]
        out: PathBuf,
    },
    /// Run one adaptation session and write its decision trace.
    #[command(allow_negative_numbers = true)]
    Simulate {
        /// itbs-nr, nr-itbs, itbs, nr, itbs+nr or luts.
        #[arg(long)]
        strategy: Option<String>,
        /// True channel SNR in dB.
        #[arg(long)]
        snr: Option<f64>,
        /// Number of transfer blocks.
        #[arg(long)]
        blocks: Option<u32>,
        /// Service mode: unack or ack.
        #[arg(long)]
        mode: Option<String>,
        /// Lookup table file for the table-driven strategy.
        #[arg(long)]
        lut: Option<PathBuf>,
        /// Block error rate target.
        #[arg(long)]
        bler_target: Option<f64>,
        /// SNR estimation noise standard deviation in dB.
        #[arg(long)]
        noise_std: Option<f64>,
        /// Output trace file.
        #[arg(long, default_value = "trace.csv")]
        trace_out: PathBuf,
    },
    /// Monte Carlo sweep over SNRs, strategies and service modes.
    #[command(allow_negative_numbers = true)]
    Sweep {
        /// Independent realizations per cell.
        #[arg(long)]
        realizations: Option<u32>,
        /// Number of transfer blocks per session.
        #[arg(long)]
        blocks: Option<u32>,
        /// Comma-separated SNR list in dB.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        snrs: Vec<f64>,
        /// Comma-separated strategy list.
        #[arg(long, value_delimiter = ',')]
        strategies: Vec<String>,
        /// Comma-separated service mode list.
        #[arg(long, value_delimiter = ',')]
        modes: Vec<String>,
        /// Lookup table file for the table-driven strategy.
        #[arg(long)]
        lut: Option<PathBuf>,
    },
    /// Analytic loss-budget versus resource-cost curve.
    #[command(allow_negative_numbers = true)]
    Tradeoff {
        /// Comma-separated SNR list in dB.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        snrs: Vec<f64>,
        /// Output curve file.
        #[arg(long, default_value = "tradeoff.csv")]
        out: PathBuf,
    },
    /// Print the rows of a stored lookup table.
    #[command(allow_negative_numbers = true)]
    LutInspect {
        /// Lookup table file.
        #[arg(long)]
        lut: PathBuf,
        /// Only rows for this block size.
        #[arg(long)]
        tbs: Option<u32>,
        /// Only rows at or above this SNR.
        #[arg(long)]
        snr_min: Option<f64>,
        /// Only rows at or below this SNR.
        #[arg(long)]
        snr_max: Option<f64>,
    },
}

/// Parses and executes a full command line (first element: program name).
pub fn run<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };

    let mut config = match &cli.config {
        Some(path) => Config::load(path).map_err(map_sim_err)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        config.session.seed = seed;
    }
    let config_source = cli.config.as_ref().map(|p| p.display().to_string());
    std::fs::create_dir_all(&cli.out_dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", cli.out_dir.display())))?;

    let ctx = CmdContext {
        config,
        config_source,
        out_dir: cli.out_dir,
    };
    match cli.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(|| dispatch(ctx, cli.command)),
        None => dispatch(ctx, cli.command),
    }
}

struct CmdContext {
    config: Config,
    config_source: Option<String>,
    out_dir: PathBuf,
}

fn dispatch(ctx: CmdContext, command: Command) -> Result<(), CliError> {
    match command {
        Command::GenLut { method, out } => cmd_gen_lut(ctx, method, out),
        Command::Simulate {
            strategy,
            snr,
            blocks,
            mode,
            lut,
            bler_target,
            noise_std,
            trace_out,
        } => cmd_simulate(
            ctx,
            strategy,
            snr,
            blocks,
            mode,
            lut,
            bler_target,
            noise_std,
            trace_out,
        ),
        Command::Sweep {
            realizations,
            blocks,
            snrs,
            strategies,
            modes,
            lut,
        } => cmd_sweep(ctx, realizations, blocks, snrs, strategies, modes, lut),
        Command::Tradeoff { snrs, out } => cmd_tradeoff(ctx, snrs, out),
        Command::LutInspect {
            lut,
            tbs,
            snr_min,
            snr_max,
        } => cmd_lut_inspect(ctx, lut, tbs, snr_min, snr_max),
    }
}

fn resolve_out(out_dir: &Path, file: &Path) -> PathBuf {
    if file.is_absolute() {
        file.to_path_buf()
    } else {
        out_dir.join(file)
    }
}

fn write_manifest(ctx: &CmdContext, command: &str) -> Result<(), CliError> {
    let manifest = RunManifest {
        manifest: ManifestMeta::new(
            command,
            ctx.config_source.clone(),
            ctx.out_dir.display().to_string(),
            ctx.config.session.seed,
        ),
        config: ctx.config.clone(),
    };
    manifest
        .save(ctx.out_dir.join("manifest.toml"))
        .map_err(map_sim_err)
}

fn load_lut_if(path: &Option<PathBuf>, step_db: f64) -> Result<Option<Lut>, CliError> {
    match path {
        Some(p) => Ok(Some(Lut::load(p, step_db).map_err(map_lut_err)?)),
        None => Ok(None),
    }
}

fn cmd_gen_lut(mut ctx: CmdContext, method: Option<String>, out: PathBuf) -> Result<(), CliError> {
    if let Some(m) = method {
        ctx.config.init.method = m.parse::<GenMethod>().map_err(CliError::Usage)?;
    }
    let config = &ctx.config;
    let oracle = config.oracle.build().map_err(map_sim_err)?;
    let table = config.resources.build().map_err(map_sim_err)?;
    let mut lut = Lut::new(config.lut.snr_step_db).map_err(map_lut_err)?;
    let targets = config.init.targets().map_err(map_sim_err)?;
    let snrs = config.init.snr_dbs(config.lut.snr_step_db).map_err(map_sim_err)?;
    let mut unreachable: Vec<InitSession> = Vec::new();

    match config.init.method {
        GenMethod::BruteForce => {
            for &tbs in &config.init.tbs_list {
                for &snr_db in &snrs {
                    let snr = Snr::new(snr_db).map_err(|e| CliError::Usage(e.to_string()))?;
                    for &bler_t in &targets {
                        match brute_force_optimal(&oracle, &table, tbs, snr, bler_t) {
                            Ok(entry) => {
                                let key = LutKey::new(tbs, snr_db, entry.bler)
                                    .map_err(map_lut_err)?;
                                lut.set_row(key, entry).map_err(map_lut_err)?;
                            }
                            Err(LutError::EmptyCandidates { .. }) => {
                                unreachable.push(InitSession { tbs, true_snr_db: snr_db, bler_t });
                            }
                            Err(e) => return Err(map_lut_err(e)),
                        }
                    }
                }
            }
        }
        GenMethod::Explore => {
            let fallback = config.strategy.kind().map_err(map_sim_err)?;
            let mut sessions = Vec::new();
            for &tbs in &config.init.tbs_list {
                for &snr_db in &snrs {
                    for &bler_t in &targets {
                        sessions.push(InitSession { tbs, true_snr_db: snr_db, bler_t });
                    }
                }
            }
            let init_cfg = InitConfig {
                fallback,
                decisions_per_session: config.init.decisions_per_session,
                max_rounds: config.init.max_rounds,
                seed: config.session.seed,
                bounds: config.strategy.bounds(),
                estimator_window: config.strategy.estimator_window,
                estimator_min_samples: config.strategy.estimator_min_samples,
                tolerance_frac: 0.5,
            };
            let report = initialize_exploratory(&mut lut, &oracle, &table, &sessions, &init_cfg)
                .map_err(map_lut_err)?;
            println!(
                "gen-lut: explored {} sessions in {} rounds",
                sessions.len(),
                report.rounds
            );
            unreachable = report.unreachable;
        }
    }

    let out_path = resolve_out(&ctx.out_dir, &out);
    lut.save(&out_path).map_err(map_lut_err)?;
    write_manifest(&ctx, "gen-lut")?;
    println!(
        "gen-lut: wrote {} rows to {}",
        lut.len(),
        out_path.display()
    );
    for s in &unreachable {
        println!(
            "gen-lut: unreachable cell tbs {} at {} dB, target {}",
            s.tbs, s.true_snr_db, s.bler_t
        );
    }

    // A tabulated oracle must cover the whole requested lattice; report
    // every hole and fail so the gaps get regenerated.
    if let BlerOracle::Tabulated(grid) = &oracle {
        let mut missing = 0usize;
        for &tbs in &config.init.tbs_list {
            for &snr_db in &snrs {
                let snapped = snap_snr_down(snr_db, grid.snr_step_db());
                for itbs in 0..=table.itbs_max() {
                    for &nr in &NR_VALUES {
                        if grid.get(tbs, snapped, itbs, nr).is_none() {
                            println!(
                                "gen-lut: missing bler sample tbs {tbs}, {snapped} dB, itbs {itbs}, nr {nr}"
                            );
                            missing += 1;
                        }
                    }
                }
            }
        }
        if missing > 0 {
            return Err(CliError::Data(format!(
                "{missing} lattice points lack bler samples; regenerate the grid to cover them"
            )));
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    mut ctx: CmdContext,
    strategy: Option<String>,
    snr: Option<f64>,
    blocks: Option<u32>,
    mode: Option<String>,
    lut: Option<PathBuf>,
    bler_target: Option<f64>,
    noise_std: Option<f64>,
    trace_out: PathBuf,
) -> Result<(), CliError> {
    if let Some(s) = strategy {
        s.parse::<StrategyKind>().map_err(CliError::Usage)?;
        ctx.config.strategy.kind = s;
    }
    if let Some(v) = snr {
        ctx.config.session.snr_db = v;
    }
    if let Some(v) = blocks {
        ctx.config.session.n_blocks = v;
    }
    if let Some(m) = mode {
        m.parse::<ServiceMode>().map_err(CliError::Usage)?;
        ctx.config.session.mode = m;
    }
    if let Some(p) = lut {
        ctx.config.lut.path = Some(p);
    }
    if let Some(v) = bler_target {
        ctx.config.session.bler_t = v;
    }
    if let Some(v) = noise_std {
        ctx.config.session.snr_noise_std = v;
    }

    let config = &ctx.config;
    let sc = config.session_config().map_err(map_sim_err)?;
    if sc.strategy == StrategyKind::Luts && config.lut.path.is_none() {
        return Err(CliError::Usage(
            "the table-driven strategy needs --lut or lut.path in the configuration".into(),
        ));
    }
    let oracle = config.oracle.build().map_err(map_sim_err)?;
    let table = config.resources.build().map_err(map_sim_err)?;
    let lut_loaded = load_lut_if(&config.lut.path, config.lut.snr_step_db)?;

    let result = run_session(&sc, &oracle, &table, lut_loaded.as_ref()).map_err(map_sim_err)?;

    let trace_path = resolve_out(&ctx.out_dir, &trace_out);
    std::fs::write(&trace_path, trace_to_csv(&result.trace))
        .map_err(|e| CliError::Data(format!("{}: {e}", trace_path.display())))?;
    write_manifest(&ctx, "simulate")?;
    println!(
        "simulate: strategy {}, {} dB, {} mode: {:.2}% lost, {} RUs, performance {:.4e}, {} retransmissions; trace in {}",
        sc.strategy,
        sc.true_snr_db,
        sc.mode,
        100.0 * result.measured_bler,
        result.total_rus,
        result.performance,
        result.retransmissions,
        trace_path.display()
    );
    Ok(())
}

fn cmd_sweep(
    mut ctx: CmdContext,
    realizations: Option<u32>,
    blocks: Option<u32>,
    snrs: Vec<f64>,
    strategies: Vec<String>,
    modes: Vec<String>,
    lut: Option<PathBuf>,
) -> Result<(), CliError> {
    if let Some(v) = realizations {
        ctx.config.sweep.realizations = v;
    }
    if let Some(v) = blocks {
        ctx.config.session.n_blocks = v;
    }
    if !snrs.is_empty() {
        ctx.config.sweep.snr_dbs = snrs;
    }
    if !strategies.is_empty() {
        for s in &strategies {
            s.parse::<StrategyKind>().map_err(CliError::Usage)?;
        }
        ctx.config.sweep.strategies = strategies;
    }
    if !modes.is_empty() {
        for m in &modes {
            m.parse::<ServiceMode>().map_err(CliError::Usage)?;
        }
        ctx.config.sweep.modes = modes;
    }
    if let Some(p) = lut {
        ctx.config.lut.path = Some(p);
    }

    let config = &ctx.config;
    let strategies = config.sweep.strategies().map_err(map_sim_err)?;
    let modes = config.sweep.modes().map_err(map_sim_err)?;
    if strategies.contains(&StrategyKind::Luts) && config.lut.path.is_none() {
        return Err(CliError::Usage(
            "the sweep includes the table-driven strategy; pass --lut or set lut.path".into(),
        ));
    }
    let oracle = config.oracle.build().map_err(map_sim_err)?;
    let table = config.resources.build().map_err(map_sim_err)?;
    let lut_loaded = load_lut_if(&config.lut.path, config.lut.snr_step_db)?;
    let base = config.session_config().map_err(map_sim_err)?;

    let mut failures = Vec::new();
    for mode in modes {
        let sweep_cfg = SweepConfig {
            base: crate::sim::SessionConfig {
                mode,
                ..base.clone()
            },
            snr_dbs: config.sweep.snr_dbs.clone(),
            strategies: strategies.clone(),
            realizations: config.sweep.realizations,
            base_seed: config.session.seed,
        };
        let outcome =
            run_sweep(&sweep_cfg, &oracle, &table, lut_loaded.as_ref()).map_err(map_sim_err)?;
        let file = match mode {
            ServiceMode::Unacknowledged => "sweep_unack.csv",
            ServiceMode::Acknowledged => "sweep_ack.csv",
        };
        let path = ctx.out_dir.join(file);
        std::fs::write(&path, sweep_to_csv(&outcome.cells))
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        println!(
            "sweep: {} mode, {} cells x {} realizations -> {}",
            mode,
            outcome.cells.len(),
            config.sweep.realizations,
            path.display()
        );
        failures.extend(outcome.failures);
    }
    write_manifest(&ctx, "sweep")?;
    if !failures.is_empty() {
        for f in &failures {
            println!(
                "sweep: failed cell {} dB, strategy {}, realization {}: {}",
                f.snr_db, f.strategy, f.rep, f.message
            );
        }
        return Err(CliError::Data(format!(
            "{} sweep realizations failed; affected cells were excluded",
            failures.len()
        )));
    }
    Ok(())
}

fn cmd_tradeoff(mut ctx: CmdContext, snrs: Vec<f64>, out: PathBuf) -> Result<(), CliError> {
    if !snrs.is_empty() {
        ctx.config.tradeoff.snr_dbs = snrs;
    }
    let config = &ctx.config;
    let oracle = config.oracle.build().map_err(map_sim_err)?;
    let table = config.resources.build().map_err(map_sim_err)?;
    let cfg = TradeoffConfig {
        tbs: config.session.tbs,
        snr_dbs: config.tradeoff.snr_dbs.clone(),
        loss_pcts: config.tradeoff.loss_pcts().map_err(map_sim_err)?,
        modes: vec![ServiceMode::Unacknowledged, ServiceMode::Acknowledged],
        ack_attempts: config.tradeoff.ack_attempts,
        harq_discount: config.session.harq_discount,
    };
    let points = tradeoff_curve(&cfg, &oracle, &table).map_err(map_sim_err)?;
    let out_path = resolve_out(&ctx.out_dir, &out);
    std::fs::write(&out_path, tradeoff_to_csv(&points))
        .map_err(|e| CliError::Data(format!("{}: {e}", out_path.display())))?;
    write_manifest(&ctx, "tradeoff")?;
    println!(
        "tradeoff: {} points -> {}",
        points.len(),
        out_path.display()
    );
    println!(
        "tradeoff: note: costs follow the configured bler model; use a tabulated grid from regenerated physical-layer curves for deployment-grade absolute numbers"
    );
    Ok(())
}

fn cmd_lut_inspect(
    ctx: CmdContext,
    lut: PathBuf,
    tbs: Option<u32>,
    snr_min: Option<f64>,
    snr_max: Option<f64>,
) -> Result<(), CliError> {
    let lut = Lut::load(&lut, ctx.config.lut.snr_step_db).map_err(map_lut_err)?;
    println!(
        "{:>6} {:>8} {:>10} {:>5} {:>5} {:>4} {:>6}",
        "tbs", "snr_db", "bler_t", "qos", "itbs", "nr", "rus"
    );
    let mut shown = 0usize;
    for (key, entry) in lut.iter() {
        if tbs.is_some_and(|t| key.tbs() != t) {
            continue;
        }
        if snr_min.is_some_and(|lo| key.snr_db() < lo) {
            continue;
        }
        if snr_max.is_some_and(|hi| key.snr_db() > hi) {
            continue;
        }
        println!(
            "{:>6} {:>8} {:>10} {:>5} {:>5} {:>4} {:>6}",
            key.tbs(),
            key.snr_db(),
            key.bler_t(),
            crate::lut::classify_qos(key.bler_t()).label(),
            entry.itbs,
            entry.nr,
            entry.rus
        );
        shown += 1;
    }
    println!("{shown} of {} rows shown", lut.len());
    Ok(())
}
