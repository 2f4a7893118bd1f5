//! Session simulator: per-block adaptation against a bler oracle under
//! unacknowledged or acknowledged service, Monte Carlo sweeps across SNR
//! and strategy with population statistics, and the analytic loss-versus-
//! resource tradeoff curve.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use thiserror::Error;

use crate::channel::{
    draw_block_outcome, BlerOracle, BlockOutcome, ChannelError, ResourceTable, Snr, NR_VALUES,
};
use crate::derive_seed;
use crate::lut::{candidates, Lut, LutError};
use crate::strategy::{
    decide, initial_params, BlerEstimator, Bounds, DecisionContext, StrategyKind,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {msg}")]
    Config { msg: String },
    #[error("block {block_idx} exceeded the safety cap of {cap} attempts")]
    NonTermination { block_idx: u32, cap: u32 },
    #[error("cell snr {snr_db} dB, strategy {strategy}, realization {rep}: {source}")]
    Cell {
        snr_db: f64,
        strategy: String,
        rep: u32,
        source: Box<SimError>,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Lut(#[from] LutError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

// ---------------------------------------------------------------------------
// Session configuration
// ---------------------------------------------------------------------------

/// Delivery contract of the simulated bearer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ServiceMode {
    /// One attempt per block; a failed block is lost.
    Unacknowledged,
    /// Failed blocks are retransmitted under the retransmission limit.
    Acknowledged,
}

impl ServiceMode {
    pub fn name(self) -> &'static str {
        match self {
            ServiceMode::Unacknowledged => "unack",
            ServiceMode::Acknowledged => "ack",
        }
    }
}

impl fmt::Display for ServiceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ServiceMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unack" => Ok(ServiceMode::Unacknowledged),
            "ack" => Ok(ServiceMode::Acknowledged),
            other => Err(format!("unknown service mode {other:?}, expected unack or ack")),
        }
    }
}

/// Total attempts allowed per block in acknowledged mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RetransmissionLimit {
    /// At most this many attempts in total (1 behaves like unacknowledged).
    Attempts(u32),
    /// Retry until delivered, guarded by the session safety cap.
    Unbounded,
}

/// How often the scheduler refreshes its SNR estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnrCadence {
    /// A fresh (noisy) estimate before every decision.
    PerDecision,
    /// One estimate drawn at session start and reused throughout.
    PerSession,
}

impl SnrCadence {
    pub fn name(self) -> &'static str {
        match self {
            SnrCadence::PerDecision => "per-decision",
            SnrCadence::PerSession => "per-session",
        }
    }
}

impl fmt::Display for SnrCadence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SnrCadence {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "per-decision" => Ok(SnrCadence::PerDecision),
            "per-session" => Ok(SnrCadence::PerSession),
            other => Err(format!(
                "unknown snr cadence {other:?}, expected per-decision or per-session"
            )),
        }
    }
}

/// Full description of one simulated session.
#[derive(Debug, Clone)]
pub struct SessionConfig {
    pub tbs: u32,
    pub n_blocks: u32,
    pub true_snr_db: f64,
    /// Standard deviation of the SNR estimation error in dB; zero or
    /// negative means the scheduler sees the true SNR.
    pub snr_noise_std: f64,
    pub mode: ServiceMode,
    pub retransmission_limit: RetransmissionLimit,
    /// Attempt ceiling that turns an unbounded retry loop into an error.
    pub safety_cap: u32,
    /// Multiplicative bler reduction per retransmission from combining.
    pub harq_discount: f64,
    pub bler_t: f64,
    /// Dead-band half width for the estimator; defaults to half the target.
    pub tolerance: Option<f64>,
    pub strategy: StrategyKind,
    pub seed: u64,
    pub estimator_window: usize,
    pub estimator_min_samples: usize,
    pub bounds: Bounds,
    /// Pinned repetition count for the I_TBS-only strategy.
    pub itbs_only_nr: u32,
    pub snr_cadence: SnrCadence,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            tbs: 256,
            n_blocks: 500,
            true_snr_db: -24.0,
            snr_noise_std: 0.0,
            mode: ServiceMode::Unacknowledged,
            retransmission_limit: RetransmissionLimit::Unbounded,
            safety_cap: 64,
            harq_discount: 0.5,
            bler_t: 0.05,
            tolerance: None,
            strategy: StrategyKind::ItbsNr,
            seed: 1,
            estimator_window: 20,
            estimator_min_samples: 5,
            bounds: Bounds::default(),
            itbs_only_nr: 128,
            snr_cadence: SnrCadence::PerDecision,
        }
    }
}

impl SessionConfig {
    pub fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or(self.bler_t * 0.5)
    }

    pub fn validate(&self, table: &ResourceTable) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::Config { msg });
        if self.n_blocks == 0 {
            return bad("n_blocks must be at least 1".into());
        }
        if !self.true_snr_db.is_finite() {
            return bad(format!("true snr {} must be finite", self.true_snr_db));
        }
        if !self.snr_noise_std.is_finite() {
            return bad(format!("snr noise std {} must be finite", self.snr_noise_std));
        }
        if !(self.harq_discount.is_finite() && (0.0..=1.0).contains(&self.harq_discount)) {
            return bad(format!("harq discount {} outside [0, 1]", self.harq_discount));
        }
        if !(self.bler_t.is_finite() && self.bler_t > 0.0 && self.bler_t <= 1.0) {
            return bad(format!("bler target {} outside (0, 1]", self.bler_t));
        }
        if let Some(tol) = self.tolerance {
            if !(tol.is_finite() && tol >= 0.0) {
                return bad(format!("tolerance {tol} must be finite and non-negative"));
            }
        }
        self.bounds.validate()?;
        if self.bounds.itbs_max > table.itbs_max() {
            return bad(format!(
                "bounds allow itbs up to {} but the resource table stops at {}",
                self.bounds.itbs_max,
                table.itbs_max()
            ));
        }
        if !NR_VALUES.contains(&self.itbs_only_nr)
            || self.itbs_only_nr < self.bounds.nr_min
            || self.itbs_only_nr > self.bounds.nr_max
        {
            return bad(format!(
                "pinned repetition count {} outside bounds",
                self.itbs_only_nr
            ));
        }
        if self.safety_cap == 0 {
            return bad("safety cap must be at least 1".into());
        }
        if let RetransmissionLimit::Attempts(n) = self.retransmission_limit {
            if n == 0 {
                return bad("attempt budget must be at least 1".into());
            }
        }
        if self.estimator_window == 0 || self.estimator_min_samples == 0 {
            return bad("estimator window and min samples must be at least 1".into());
        }
        if self.estimator_min_samples > self.estimator_window {
            return bad(format!(
                "estimator min samples {} exceeds window {}",
                self.estimator_min_samples, self.estimator_window
            ));
        }
        // Iterative strategies may wander onto any coding row within
        // bounds, so the block must fit all of them.
        for itbs in 0..=self.bounds.itbs_max {
            if let Err(e) = table.rus_no_rep(self.tbs, itbs) {
                return bad(format!("block does not fit every coding row in bounds: {e}"));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Session execution
// ---------------------------------------------------------------------------

/// One transmission attempt as the scheduler saw it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub block_idx: u32,
    /// Attempt number within the block, starting at 0.
    pub attempt: u32,
    pub itbs: u8,
    pub nr: u32,
    /// Estimator output before this decision, if warm.
    pub bler_est: Option<f64>,
    /// Resource units spent so far, including this attempt.
    pub cum_rus: u64,
    /// Blocks delivered so far, including this attempt's outcome.
    pub cum_success: u32,
}

/// Everything a finished session produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionResult {
    pub trace: Vec<TraceRecord>,
    pub blocks_lost: u32,
    pub successes: u32,
    pub total_rus: u64,
    /// Extra attempts beyond the first, across all blocks.
    pub retransmissions: u64,
    /// Fraction of blocks lost.
    pub measured_bler: f64,
    pub performance: f64,
}

/// Goodput-per-resource figure of merit.
pub fn performance(bler: f64, total_rus: u64) -> Result<f64, SimError> {
    if total_rus == 0 {
        return Err(SimError::Config {
            msg: "performance undefined for zero resource units".into(),
        });
    }
    Ok((1.0 - bler).powi(2) / total_rus as f64)
}

/// Scheduler's SNR estimate: the true value blurred by zero-mean Gaussian
/// error. A non-positive std returns the true SNR without consuming
/// randomness.
pub fn estimate_snr<R: Rng + ?Sized>(
    true_snr: Snr,
    noise_std: f64,
    rng: &mut R,
) -> Result<Snr, SimError> {
    if noise_std <= 0.0 {
        return Ok(true_snr);
    }
    let normal = Normal::new(0.0, noise_std).map_err(|e| SimError::Config {
        msg: format!("snr noise: {e}"),
    })?;
    Ok(Snr::new(true_snr.db() + normal.sample(rng))?)
}

/// Runs one adaptation session. The strategy decides before every attempt;
/// the outcome estimator updates on every attempt in both service modes.
/// Retransmissions see the channel bler discounted per extra attempt.
pub fn run_session(
    cfg: &SessionConfig,
    oracle: &BlerOracle,
    table: &ResourceTable,
    lut: Option<&Lut>,
) -> Result<SessionResult, SimError> {
    cfg.validate(table)?;
    if cfg.strategy == StrategyKind::Luts && lut.is_none() {
        return Err(SimError::Config {
            msg: "table-driven strategy requires a lookup table".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let true_snr = Snr::new(cfg.true_snr_db)?;
    let mut estimator = BlerEstimator::new(cfg.estimator_window, cfg.estimator_min_samples);
    let mut params = initial_params(cfg.strategy, &cfg.bounds, cfg.itbs_only_nr)?;
    let tolerance = cfg.tolerance();
    let session_snr_est = match cfg.snr_cadence {
        SnrCadence::PerSession => Some(estimate_snr(true_snr, cfg.snr_noise_std, &mut rng)?),
        SnrCadence::PerDecision => None,
    };

    let mut trace = Vec::with_capacity(cfg.n_blocks as usize);
    let mut blocks_lost = 0u32;
    let mut successes = 0u32;
    let mut cum_rus = 0u64;
    let mut retransmissions = 0u64;

    for block_idx in 0..cfg.n_blocks {
        let mut attempt = 0u32;
        loop {
            let snr_est = match session_snr_est {
                Some(s) => s,
                None => estimate_snr(true_snr, cfg.snr_noise_std, &mut rng)?,
            };
            let bler_est = estimator.estimate();
            let ctx = DecisionContext {
                current: params,
                bler_est,
                snr_est: Some(snr_est),
                bler_t: cfg.bler_t,
                tbs: cfg.tbs,
                tolerance,
            };
            params = decide(cfg.strategy, &ctx, &cfg.bounds, lut).params;
            cum_rus += u64::from(table.total_rus(cfg.tbs, params)?);
            let channel_bler = oracle.bler(cfg.tbs, true_snr, params)?;
            let attempt_bler =
                (channel_bler * cfg.harq_discount.powi(attempt as i32)).clamp(0.0, 1.0);
            let outcome = draw_block_outcome(attempt_bler, &mut rng);
            estimator.update(outcome == BlockOutcome::Failure);
            if outcome == BlockOutcome::Success {
                successes += 1;
            }
            trace.push(TraceRecord {
                block_idx,
                attempt,
                itbs: params.itbs(),
                nr: params.nr(),
                bler_est,
                cum_rus,
                cum_success: successes,
            });
            if outcome == BlockOutcome::Success {
                break;
            }
            match cfg.mode {
                ServiceMode::Unacknowledged => {
                    blocks_lost += 1;
                    break;
                }
                ServiceMode::Acknowledged => {
                    let next_attempt = attempt + 1;
                    if let RetransmissionLimit::Attempts(n) = cfg.retransmission_limit {
                        if next_attempt >= n {
                            blocks_lost += 1;
                            break;
                        }
                    } else if next_attempt >= cfg.safety_cap {
                        return Err(SimError::NonTermination {
                            block_idx,
                            cap: cfg.safety_cap,
                        });
                    }
                    attempt = next_attempt;
                    retransmissions += 1;
                }
            }
        }
    }

    let measured_bler = f64::from(blocks_lost) / f64::from(cfg.n_blocks);
    let perf = performance(measured_bler, cum_rus)?;
    Ok(SessionResult {
        trace,
        blocks_lost,
        successes,
        total_rus: cum_rus,
        retransmissions,
        measured_bler,
        performance: perf,
    })
}

// ---------------------------------------------------------------------------
// Retransmission cost model
// ---------------------------------------------------------------------------

/// Expected resource units to deliver one block when each attempt costs
/// `rus_per_tx` and attempt `i` fails with `bler_seq[i]`, counting only
/// sequences that end in delivery within `attempts` tries.
pub fn expected_ru_cost(rus_per_tx: u32, bler_seq: &[f64], attempts: usize) -> f64 {
    assert!(attempts >= 1, "at least one attempt");
    assert!(
        bler_seq.len() >= attempts,
        "need a bler for every attempt: {} < {attempts}",
        bler_seq.len()
    );
    let mut all_failed = 1.0;
    let mut expected = 0.0;
    for (i, &bler) in bler_seq.iter().take(attempts).enumerate() {
        expected += (i + 1) as f64 * all_failed * (1.0 - bler);
        all_failed *= bler;
    }
    f64::from(rus_per_tx) * expected
}

/// Per-attempt bler sequence under multiplicative combining gain.
pub fn discounted_bler_seq(bler0: f64, discount: f64, attempts: usize) -> Vec<f64> {
    (0..attempts)
        .map(|i| (bler0 * discount.powi(i as i32)).clamp(0.0, 1.0))
        .collect()
}

// ---------------------------------------------------------------------------
// Monte Carlo sweep
// ---------------------------------------------------------------------------

/// Population mean and standard deviation over sweep realizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStats {
    pub mean: f64,
    pub std: f64,
}

fn stats(values: &[f64]) -> CellStats {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    CellStats {
        mean,
        std: var.sqrt(),
    }
}

/// Aggregated metrics of one (snr, strategy) sweep cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub snr_db: f64,
    pub strategy: StrategyKind,
    pub losses_pct: CellStats,
    pub total_rus: CellStats,
    pub performance: CellStats,
    pub retransmissions: CellStats,
}

/// A realization that errored instead of producing metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub snr_db: f64,
    pub strategy: StrategyKind,
    pub rep: u32,
    pub message: String,
}

/// Cells that aggregated cleanly, plus every realization failure. A cell
/// with any failed realization is excluded from `cells`.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub cells: Vec<SweepCell>,
    pub failures: Vec<CellFailure>,
}

/// Grid of sessions to run: every SNR crossed with every strategy.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub base: SessionConfig,
    pub snr_dbs: Vec<f64>,
    pub strategies: Vec<StrategyKind>,
    pub realizations: u32,
    pub base_seed: u64,
}

/// Runs the sweep. Realizations are seeded from (cell index, realization
/// index) alone, so results are byte-identical regardless of thread count.
pub fn run_sweep(
    cfg: &SweepConfig,
    oracle: &BlerOracle,
    table: &ResourceTable,
    lut: Option<&Lut>,
) -> Result<SweepOutcome, SimError> {
    if cfg.snr_dbs.is_empty() || cfg.strategies.is_empty() {
        return Err(SimError::Config {
            msg: "sweep needs at least one snr and one strategy".into(),
        });
    }
    if cfg.realizations == 0 {
        return Err(SimError::Config {
            msg: "sweep needs at least one realization".into(),
        });
    }
    if cfg.strategies.contains(&StrategyKind::Luts) && lut.is_none() {
        return Err(SimError::Config {
            msg: "sweep includes the table-driven strategy but no lookup table".into(),
        });
    }

    let cells: Vec<(f64, StrategyKind)> = cfg
        .snr_dbs
        .iter()
        .flat_map(|&snr| cfg.strategies.iter().map(move |&s| (snr, s)))
        .collect();
    let runs: Vec<(usize, u32)> = (0..cells.len())
        .flat_map(|c| (0..cfg.realizations).map(move |r| (c, r)))
        .collect();

    // Metrics per realization: losses %, total RUs, performance,
    // retransmissions. Traces are dropped immediately to bound memory.
    let results: Vec<Result<[f64; 4], (u32, String)>> = runs
        .par_iter()
        .map(|&(cell_idx, rep)| {
            let (snr_db, strategy) = cells[cell_idx];
            let mut sc = cfg.base.clone();
            sc.true_snr_db = snr_db;
            sc.strategy = strategy;
            sc.seed = derive_seed(cfg.base_seed, ((cell_idx as u64) << 32) | u64::from(rep));
            match run_session(&sc, oracle, table, lut) {
                Ok(r) => Ok([
                    100.0 * f64::from(r.blocks_lost) / f64::from(sc.n_blocks),
                    r.total_rus as f64,
                    r.performance,
                    r.retransmissions as f64,
                ]),
                Err(e) => Err((rep, e.to_string())),
            }
        })
        .collect();

    let mut out = SweepOutcome {
        cells: Vec::new(),
        failures: Vec::new(),
    };
    let reps = cfg.realizations as usize;
    for (cell_idx, &(snr_db, strategy)) in cells.iter().enumerate() {
        let chunk = &results[cell_idx * reps..(cell_idx + 1) * reps];
        let mut metrics: [Vec<f64>; 4] = Default::default();
        let mut clean = true;
        for res in chunk {
            match res {
                Ok(m) => {
                    for (store, &v) in metrics.iter_mut().zip(m) {
                        store.push(v);
                    }
                }
                Err((rep, message)) => {
                    clean = false;
                    out.failures.push(CellFailure {
                        snr_db,
                        strategy,
                        rep: *rep,
                        message: message.clone(),
                    });
                }
            }
        }
        if clean {
            out.cells.push(SweepCell {
                snr_db,
                strategy,
                losses_pct: stats(&metrics[0]),
                total_rus: stats(&metrics[1]),
                performance: stats(&metrics[2]),
                retransmissions: stats(&metrics[3]),
            });
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Loss-versus-resource tradeoff
// ---------------------------------------------------------------------------

/// Slack added to a loss budget so an assignment achieving effectively that
/// loss (e.g. 0.006% against a 0% budget) still qualifies.
pub const LOSS_EPS: f64 = 1e-4;

/// Cheapest resource cost meeting one loss budget, or none if unreachable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffPoint {
    pub snr_db: f64,
    pub mode: ServiceMode,
    pub loss_pct: f64,
    pub rus: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TradeoffConfig {
    pub tbs: u32,
    pub snr_dbs: Vec<f64>,
    pub loss_pcts: Vec<f64>,
    pub modes: Vec<ServiceMode>,
    /// Attempt budget used for acknowledged-mode expected cost.
    pub ack_attempts: u32,
    pub harq_discount: f64,
}

/// Analytic curve: for each loss budget, the cheapest assignment whose
/// single-attempt bler fits the budget. Unacknowledged cost is one
/// transmission; acknowledged cost is the expected resource units over the
/// discounted retransmission sequence.
pub fn tradeoff_curve(
    cfg: &TradeoffConfig,
    oracle: &BlerOracle,
    table: &ResourceTable,
) -> Result<Vec<TradeoffPoint>, SimError> {
    if cfg.snr_dbs.is_empty() || cfg.loss_pcts.is_empty() || cfg.modes.is_empty() {
        return Err(SimError::Config {
            msg: "tradeoff needs at least one snr, one loss budget and one mode".into(),
        });
    }
    if cfg.ack_attempts == 0 {
        return Err(SimError::Config {
            msg: "ack attempt budget must be at least 1".into(),
        });
    }
    if !(cfg.harq_discount.is_finite() && (0.0..=1.0).contains(&cfg.harq_discount)) {
        return Err(SimError::Config {
            msg: format!("harq discount {} outside [0, 1]", cfg.harq_discount),
        });
    }
    for &pct in &cfg.loss_pcts {
        if !(pct.is_finite() && (0.0..=100.0).contains(&pct)) {
            return Err(SimError::Config {
                msg: format!("loss budget {pct}% outside [0, 100]"),
            });
        }
    }

    let mut out = Vec::new();
    for &snr_db in &cfg.snr_dbs {
        let snr = Snr::new(snr_db)?;
        for &mode in &cfg.modes {
            for &loss_pct in &cfg.loss_pcts {
                let target = loss_pct / 100.0 + LOSS_EPS;
                let rus = match candidates(oracle, table, cfg.tbs, snr, target) {
                    Ok(cands) => {
                        let mut best = f64::INFINITY;
                        for (params, bler) in cands {
                            let per_tx = table.total_rus(cfg.tbs, params)?;
                            let cost = match mode {
                                ServiceMode::Unacknowledged => f64::from(per_tx),
                                ServiceMode::Acknowledged => {
                                    let n = cfg.ack_attempts as usize;
                                    let seq = discounted_bler_seq(bler, cfg.harq_discount, n);
                                    expected_ru_cost(per_tx, &seq, n)
                                }
                            };
                            best = best.min(cost);
                        }
                        Some(best)
                    }
                    Err(LutError::EmptyCandidates { .. }) => None,
                    Err(e) => return Err(e.into()),
                };
                out.push(TradeoffPoint {
                    snr_db,
                    mode,
                    loss_pct,
                    rus,
                });
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// `block_idx,attempt,itbs,nr,bler_est,cum_rus,cum_success`; the estimate
/// column is empty while the estimator is cold.
pub fn trace_to_csv(trace: &[TraceRecord]) -> String {
    let mut out = String::from("block_idx,attempt,itbs,nr,bler_est,cum_rus,cum_success\n");
    for r in trace {
        let est = r.bler_est.map(|e| e.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.block_idx, r.attempt, r.itbs, r.nr, est, r.cum_rus, r.cum_success
        ));
    }
    out
}

pub fn trace_from_csv(text: &str) -> Result<Vec<TraceRecord>, SimError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let row = raw.trim_end();
        if row.is_empty() {
            continue;
        }
        if idx == 0 {
            if row != "block_idx,attempt,itbs,nr,bler_est,cum_rus,cum_success" {
                return Err(SimError::Parse {
                    line,
                    msg: format!("unexpected trace header {row}"),
                });
            }
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 7 {
            return Err(SimError::Parse {
                line,
                msg: format!("expected 7 fields, got {}", fields.len()),
            });
        }
        let parse_err = |what: &str, v: &str| SimError::Parse {
            line,
            msg: format!("bad {what}: {v}"),
        };
        let bler_est = if fields[4].is_empty() {
            None
        } else {
            Some(fields[4].parse::<f64>().map_err(|_| parse_err("bler_est", fields[4]))?)
        };
        out.push(TraceRecord {
            block_idx: fields[0].parse().map_err(|_| parse_err("block_idx", fields[0]))?,
            attempt: fields[1].parse().map_err(|_| parse_err("attempt", fields[1]))?,
            itbs: fields[2].parse().map_err(|_| parse_err("itbs", fields[2]))?,
            nr: fields[3].parse().map_err(|_| parse_err("nr", fields[3]))?,
            bler_est,
            cum_rus: fields[5].parse().map_err(|_| parse_err("cum_rus", fields[5]))?,
            cum_success: fields[6].parse().map_err(|_| parse_err("cum_success", fields[6]))?,
        });
    }
    Ok(out)
}

const SWEEP_METRICS: [&str; 4] = ["losses_pct", "total_rus", "performance", "retransmissions"];

/// `snr_db,strategy,metric,mean,std`, four metric rows per cell.
pub fn sweep_to_csv(cells: &[SweepCell]) -> String {
    let mut out = String::from("snr_db,strategy,metric,mean,std\n");
    for c in cells {
        let metrics = [c.losses_pct, c.total_rus, c.performance, c.retransmissions];
        for (name, m) in SWEEP_METRICS.iter().zip(metrics) {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                c.snr_db, c.strategy, name, m.mean, m.std
            ));
        }
    }
    out
}

pub fn sweep_from_csv(text: &str) -> Result<Vec<SweepCell>, SimError> {
    struct Row {
        line: usize,
        snr_db: f64,
        strategy: StrategyKind,
        metric: String,
        stats: CellStats,
    }
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let row = raw.trim_end();
        if row.is_empty() {
            continue;
        }
        if idx == 0 {
            if row != "snr_db,strategy,metric,mean,std" {
                return Err(SimError::Parse {
                    line,
                    msg: format!("unexpected sweep header {row}"),
                });
            }
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 5 {
            return Err(SimError::Parse {
                line,
                msg: format!("expected 5 fields, got {}", fields.len()),
            });
        }
        let parse_err = |what: &str, v: &str| SimError::Parse {
            line,
            msg: format!("bad {what}: {v}"),
        };
        rows.push(Row {
            line,
            snr_db: fields[0].parse().map_err(|_| parse_err("snr_db", fields[0]))?,
            strategy: fields[1]
                .parse()
                .map_err(|msg: String| SimError::Parse { line, msg })?,
            metric: fields[2].to_string(),
            stats: CellStats {
                mean: fields[3].parse().map_err(|_| parse_err("mean", fields[3]))?,
                std: fields[4].parse().map_err(|_| parse_err("std", fields[4]))?,
            },
        });
    }
    if rows.len() % 4 != 0 {
        return Err(SimError::Parse {
            line: rows.last().map_or(1, |r| r.line),
            msg: format!("expected metric rows in groups of 4, got {}", rows.len()),
        });
    }
    let mut cells = Vec::new();
    for group in rows.chunks(4) {
        for (row, expect) in group.iter().zip(SWEEP_METRICS) {
            if row.metric != expect
                || row.snr_db != group[0].snr_db
                || row.strategy != group[0].strategy
            {
                return Err(SimError::Parse {
                    line: row.line,
                    msg: format!("expected metric {expect} of one cell, got {}", row.metric),
                });
            }
        }
        cells.push(SweepCell {
            snr_db: group[0].snr_db,
            strategy: group[0].strategy,
            losses_pct: group[0].stats,
            total_rus: group[1].stats,
            performance: group[2].stats,
            retransmissions: group[3].stats,
        });
    }
    Ok(cells)
}

/// `snr_db,loss_pct,mode,rus`, with `unreachable` marking budgets no
/// assignment meets.
pub fn tradeoff_to_csv(points: &[TradeoffPoint]) -> String {
    let mut out = String::from("snr_db,loss_pct,mode,rus\n");
    for p in points {
        let rus = p.rus.map(|r| r.to_string()).unwrap_or_else(|| "unreachable".into());
        out.push_str(&format!("{},{},{},{}\n", p.snr_db, p.loss_pct, p.mode, rus));
    }
    out
}

pub fn tradeoff_from_csv(text: &str) -> Result<Vec<TradeoffPoint>, SimError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let row = raw.trim_end();
        if row.is_empty() {
            continue;
        }
        if idx == 0 {
            if row != "snr_db,loss_pct,mode,rus" {
                return Err(SimError::Parse {
                    line,
                    msg: format!("unexpected tradeoff header {row}"),
                });
            }
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 4 {
            return Err(SimError::Parse {
                line,
                msg: format!("expected 4 fields, got {}", fields.len()),
            });
        }
        let parse_err = |what: &str, v: &str| SimError::Parse {
            line,
            msg: format!("bad {what}: {v}"),
        };
        let rus = if fields[3] == "unreachable" {
            None
        } else {
            Some(fields[3].parse::<f64>().map_err(|_| parse_err("rus", fields[3]))?)
        };
        out.push(TradeoffPoint {
            snr_db: fields[0].parse().map_err(|_| parse_err("snr_db", fields[0]))?,
            loss_pct: fields[1].parse().map_err(|_| parse_err("loss_pct", fields[1]))?,
            mode: fields[2]
                .parse()
                .map_err(|msg: String| SimError::Parse { line, msg })?,
            rus,
        });
    }
    Ok(out)
}
