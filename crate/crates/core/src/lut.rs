//! Lookup-table scheduling: QoS banding of block error rates, keyed storage
//! of minimum-resource link assignments, brute-force reference selection,
//! and exploratory initialization driven by an iterative fallback strategy.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::channel::{
    draw_block_outcome, snr_mdb, BlerOracle, BlockOutcome, ChannelError, LinkParams,
    ResourceTable, Snr,
};
use crate::derive_seed;
use crate::strategy::{decide, initial_params, BlerEstimator, Bounds, DecisionContext, StrategyKind};

/// Scheduling rows for a 256-bit block at -24 dB matching the sample bler
/// grid, a starter lookup table.
pub const SAMPLE_LUT_CSV: &str = include_str!("../data/sample_lut.csv");

#[derive(Debug, Error)]
pub enum LutError {
    #[error("no link parameters reach target {bler_t} for tbs {tbs} at {snr_db} dB")]
    EmptyCandidates { tbs: u32, snr_db: f64, bler_t: f64 },
    #[error("no stored row serves tbs {tbs} at {snr_db} dB with target {bler_t}")]
    NoFeasibleRow { tbs: u32, snr_db: f64, bler_t: f64 },
    #[error("no row stored for tbs {tbs}, snr {snr_db} dB, target {bler_t}")]
    MissingKey { tbs: u32, snr_db: f64, bler_t: f64 },
    #[error("invalid table row: {msg}")]
    InvalidEntry { msg: String },
    #[error("strategy {0} cannot drive exploratory initialization")]
    InvalidFallback(StrategyKind),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("initialization did not converge within {max_rounds} rounds")]
    NonConvergence { max_rounds: u32 },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

// ---------------------------------------------------------------------------
// QoS banding
// ---------------------------------------------------------------------------

/// Service quality band of a block error rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QosBand {
    Good,
    Poor,
    Bad,
}

impl QosBand {
    pub const ALL: [QosBand; 3] = [QosBand::Good, QosBand::Poor, QosBand::Bad];

    pub fn label(self) -> &'static str {
        match self {
            QosBand::Good => "good",
            QosBand::Poor => "poor",
            QosBand::Bad => "bad",
        }
    }
}

impl fmt::Display for QosBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for QosBand {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "good" => Ok(QosBand::Good),
            "poor" => Ok(QosBand::Poor),
            "bad" => Ok(QosBand::Bad),
            other => Err(format!("unknown qos band {other:?}, expected good, poor or bad")),
        }
    }
}

/// Band boundaries: `good` up to and including `good_max`, `poor` up to and
/// including `poor_max`, `bad` above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QosThresholds {
    pub good_max: f64,
    pub poor_max: f64,
}

impl Default for QosThresholds {
    fn default() -> Self {
        Self {
            good_max: 0.05,
            poor_max: 0.9,
        }
    }
}

impl QosThresholds {
    pub fn classify(&self, bler: f64) -> QosBand {
        if bler <= self.good_max {
            QosBand::Good
        } else if bler <= self.poor_max {
            QosBand::Poor
        } else {
            QosBand::Bad
        }
    }

    /// The loosest block-error-rate target still inside a band.
    pub fn target_for(&self, band: QosBand) -> f64 {
        match band {
            QosBand::Good => self.good_max,
            QosBand::Poor => self.poor_max,
            QosBand::Bad => 1.0,
        }
    }
}

/// Banding under the default thresholds.
pub fn classify_qos(bler: f64) -> QosBand {
    QosThresholds::default().classify(bler)
}

// ---------------------------------------------------------------------------
// Keys and entries
// ---------------------------------------------------------------------------

/// Lookup key: block size, quantized SNR, and the block-error-rate target
/// the stored assignment is guaranteed to meet.
#[derive(Debug, Clone, Copy)]
pub struct LutKey {
    tbs: u32,
    snr_mdb: i64,
    bler_t: f64,
}

impl LutKey {
    pub fn new(tbs: u32, snr_db: f64, bler_t: f64) -> Result<Self, LutError> {
        if !snr_db.is_finite() {
            return Err(ChannelError::NonFiniteSnr(snr_db).into());
        }
        if !(bler_t.is_finite() && bler_t > 0.0 && bler_t <= 1.0) {
            return Err(LutError::InvalidEntry {
                msg: format!("bler target {bler_t} outside (0, 1]"),
            });
        }
        Ok(Self {
            tbs,
            snr_mdb: snr_mdb(snr_db),
            bler_t,
        })
    }

    pub fn tbs(self) -> u32 {
        self.tbs
    }

    pub fn snr_db(self) -> f64 {
        self.snr_mdb as f64 / 1000.0
    }

    pub fn bler_t(self) -> f64 {
        self.bler_t
    }
}

impl PartialEq for LutKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for LutKey {}

impl Ord for LutKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.tbs
            .cmp(&other.tbs)
            .then_with(|| self.snr_mdb.cmp(&other.snr_mdb))
            .then_with(|| self.bler_t.total_cmp(&other.bler_t))
    }
}

impl PartialOrd for LutKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for LutKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(tbs {}, {} dB, target {})", self.tbs, self.snr_db(), self.bler_t)
    }
}

/// Stored assignment: the link parameters, the block error rate they achieve
/// at the key's SNR, and their resource-unit cost per transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LutEntry {
    pub itbs: u8,
    pub nr: u32,
    pub bler: f64,
    pub rus: u32,
}

impl LutEntry {
    pub fn params(&self) -> Result<LinkParams, ChannelError> {
        LinkParams::new(self.itbs, self.nr)
    }
}

// ---------------------------------------------------------------------------
// The table
// ---------------------------------------------------------------------------

/// Minimum-resource assignments keyed by (tbs, SNR, bler target).
#[derive(Debug, Clone, PartialEq)]
pub struct Lut {
    rows: BTreeMap<LutKey, LutEntry>,
    snr_step_db: f64,
}

impl Lut {
    pub fn new(snr_step_db: f64) -> Result<Self, LutError> {
        if !(snr_step_db.is_finite() && snr_step_db > 0.0) {
            return Err(LutError::InvalidEntry {
                msg: format!("snr step {snr_step_db} must be positive and finite"),
            });
        }
        Ok(Self {
            rows: BTreeMap::new(),
            snr_step_db,
        })
    }

    pub fn snr_step_db(&self) -> f64 {
        self.snr_step_db
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LutKey, &LutEntry)> {
        self.rows.iter()
    }

    /// Exact lookup of one stored row.
    pub fn get_tuple(&self, key: LutKey) -> Result<LutEntry, LutError> {
        self.rows.get(&key).copied().ok_or(LutError::MissingKey {
            tbs: key.tbs,
            snr_db: key.snr_db(),
            bler_t: key.bler_t,
        })
    }

    fn check_entry(key: LutKey, entry: LutEntry) -> Result<(), LutError> {
        entry.params()?;
        if !(entry.bler.is_finite() && (0.0..=1.0).contains(&entry.bler)) {
            return Err(LutError::InvalidEntry {
                msg: format!("bler {} outside [0, 1]", entry.bler),
            });
        }
        if entry.bler > key.bler_t {
            return Err(LutError::InvalidEntry {
                msg: format!("achieved bler {} exceeds target {}", entry.bler, key.bler_t),
            });
        }
        if entry.rus == 0 {
            return Err(LutError::InvalidEntry {
                msg: "zero resource units".into(),
            });
        }
        Ok(())
    }

    /// Inserts a row, or replaces an existing one only when the new entry
    /// costs strictly fewer resource units. Returns whether it was written.
    pub fn set_row(&mut self, key: LutKey, entry: LutEntry) -> Result<bool, LutError> {
        Self::check_entry(key, entry)?;
        match self.rows.get(&key) {
            Some(old) if old.rus <= entry.rus => Ok(false),
            _ => {
                self.rows.insert(key, entry);
                Ok(true)
            }
        }
    }

    /// Unconditional insert, for canonicalizing equal-cost ties.
    pub fn set_row_forced(&mut self, key: LutKey, entry: LutEntry) -> Result<(), LutError> {
        Self::check_entry(key, entry)?;
        self.rows.insert(key, entry);
        Ok(())
    }

    /// Deep consistency check of every stored row against a resource table.
    pub fn validate_against(&self, table: &ResourceTable) -> Result<(), LutError> {
        for (key, entry) in &self.rows {
            let params = entry.params()?;
            let rus = table.total_rus(key.tbs, params)?;
            if rus != entry.rus {
                return Err(LutError::InvalidEntry {
                    msg: format!(
                        "row {key} stores {} resource units but {params} costs {rus}",
                        entry.rus
                    ),
                });
            }
        }
        Ok(())
    }

    /// The minimum-resource stored row usable at an estimated SNR: rows at
    /// or below the estimate (pessimistic) whose achieved bler meets the
    /// target, preferring fewer resource units, then fewer repetitions, then
    /// lower I_TBS, then the closest SNR, then the tightest target.
    pub fn get_closest_min_ru(
        &self,
        tbs: u32,
        snr_est: Snr,
        bler_t: f64,
    ) -> Result<LutKey, LutError> {
        let est_mdb = snr_mdb(snr_est.db());
        let lo = LutKey {
            tbs,
            snr_mdb: i64::MIN,
            bler_t: f64::NEG_INFINITY,
        };
        let hi = LutKey {
            tbs,
            snr_mdb: est_mdb,
            bler_t: f64::INFINITY,
        };
        let mut best: Option<(&LutKey, &LutEntry)> = None;
        for (key, entry) in self.rows.range(lo..=hi) {
            if entry.bler > bler_t {
                continue;
            }
            let better = match best {
                None => true,
                Some((bk, be)) => {
                    entry
                        .rus
                        .cmp(&be.rus)
                        .then(entry.nr.cmp(&be.nr))
                        .then(entry.itbs.cmp(&be.itbs))
                        .then(bk.snr_mdb.cmp(&key.snr_mdb))
                        .then(key.bler_t.total_cmp(&bk.bler_t))
                        == Ordering::Less
                }
            };
            if better {
                best = Some((key, entry));
            }
        }
        best.map(|(k, _)| *k).ok_or(LutError::NoFeasibleRow {
            tbs,
            snr_db: snr_est.db(),
            bler_t,
        })
    }

    // -- CSV ----------------------------------------------------------------

    /// Serializes as `tbs,snr_db,bler_t,qos,itbs,nr,rus`, sorted by key. The
    /// achieved bler is not a column: rows are written under their achieved
    /// bler as the target (the canonical keying this crate produces), so
    /// reloading sets each entry's bler to its key's target.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("tbs,snr_db,bler_t,qos,itbs,nr,rus\n");
        for (key, entry) in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                key.tbs,
                key.snr_db(),
                key.bler_t,
                classify_qos(key.bler_t).label(),
                entry.itbs,
                entry.nr,
                entry.rus
            ));
        }
        out
    }

    pub fn from_csv_str(text: &str, snr_step_db: f64) -> Result<Self, LutError> {
        let mut lut = Self::new(snr_step_db)?;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let row = raw.trim();
            if row.is_empty() {
                continue;
            }
            if idx == 0 {
                if row != "tbs,snr_db,bler_t,qos,itbs,nr,rus" {
                    return Err(LutError::Parse {
                        line,
                        msg: format!("expected header tbs,snr_db,bler_t,qos,itbs,nr,rus, got {row}"),
                    });
                }
                continue;
            }
            let fields: Vec<&str> = row.split(',').collect();
            if fields.len() != 7 {
                return Err(LutError::Parse {
                    line,
                    msg: format!("expected 7 fields, got {}", fields.len()),
                });
            }
            let parse_err = |what: &str, v: &str| LutError::Parse {
                line,
                msg: format!("bad {what}: {v}"),
            };
            let tbs: u32 = fields[0].trim().parse().map_err(|_| parse_err("tbs", fields[0]))?;
            let snr_db: f64 = fields[1]
                .trim()
                .parse()
                .map_err(|_| parse_err("snr_db", fields[1]))?;
            let bler_t: f64 = fields[2]
                .trim()
                .parse()
                .map_err(|_| parse_err("bler_t", fields[2]))?;
            QosBand::from_str(fields[3].trim()).map_err(|msg| LutError::Parse { line, msg })?;
            let itbs: u8 = fields[4].trim().parse().map_err(|_| parse_err("itbs", fields[4]))?;
            let nr: u32 = fields[5].trim().parse().map_err(|_| parse_err("nr", fields[5]))?;
            let rus: u32 = fields[6].trim().parse().map_err(|_| parse_err("rus", fields[6]))?;
            let key = LutKey::new(tbs, snr_db, bler_t).map_err(|e| LutError::Parse {
                line,
                msg: e.to_string(),
            })?;
            let entry = LutEntry {
                itbs,
                nr,
                bler: bler_t,
                rus,
            };
            Self::check_entry(key, entry).map_err(|e| LutError::Parse {
                line,
                msg: e.to_string(),
            })?;
            if lut.rows.insert(key, entry).is_some() {
                return Err(LutError::Parse {
                    line,
                    msg: format!("duplicate key {key}"),
                });
            }
        }
        Ok(lut)
    }

    pub fn load<P: AsRef<Path>>(path: P, snr_step_db: f64) -> Result<Self, LutError> {
        Self::from_csv_str(&std::fs::read_to_string(path)?, snr_step_db)
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<(), LutError> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Reference selection
// ---------------------------------------------------------------------------

/// Every link assignment meeting the bler target at the given SNR, with its
/// achieved bler. Coding rows too small for the block and lattice points the
/// oracle has no sample for are skipped.
pub fn candidates(
    oracle: &BlerOracle,
    table: &ResourceTable,
    tbs: u32,
    snr: Snr,
    bler_t: f64,
) -> Result<Vec<(LinkParams, f64)>, LutError> {
    let mut out = Vec::new();
    for itbs in 0..=table.itbs_max() {
        if matches!(table.rus_no_rep(tbs, itbs), Err(ChannelError::TbsTooLarge { .. })) {
            continue;
        }
        for &nr in &crate::channel::NR_VALUES {
            let params = LinkParams::new(itbs, nr)?;
            match oracle.bler(tbs, snr, params) {
                Ok(bler) if bler <= bler_t => out.push((params, bler)),
                Ok(_) => {}
                Err(ChannelError::MissingGridRow { .. }) => {}
                Err(e) => return Err(e.into()),
            }
        }
    }
    if out.is_empty() {
        return Err(LutError::EmptyCandidates {
            tbs,
            snr_db: snr.db(),
            bler_t,
        });
    }
    Ok(out)
}

/// Exhaustive minimum-resource assignment for one (tbs, snr, target) cell,
/// ties broken by fewer repetitions, then lower I_TBS.
pub fn brute_force_optimal(
    oracle: &BlerOracle,
    table: &ResourceTable,
    tbs: u32,
    snr: Snr,
    bler_t: f64,
) -> Result<LutEntry, LutError> {
    let mut best: Option<LutEntry> = None;
    for (params, bler) in candidates(oracle, table, tbs, snr, bler_t)? {
        let rus = table.total_rus(tbs, params)?;
        let better = match &best {
            None => true,
            Some(b) => {
                rus.cmp(&b.rus)
                    .then(params.nr().cmp(&b.nr))
                    .then(params.itbs().cmp(&b.itbs))
                    == Ordering::Less
            }
        };
        if better {
            best = Some(LutEntry {
                itbs: params.itbs(),
                nr: params.nr(),
                bler,
                rus,
            });
        }
    }
    Ok(best.expect("candidates is never empty on Ok"))
}

// ---------------------------------------------------------------------------
// Exploratory initialization
// ---------------------------------------------------------------------------

/// One training session: a block size and bler target served at a true SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitSession {
    pub tbs: u32,
    pub true_snr_db: f64,
    pub bler_t: f64,
}

/// Knobs for exploratory initialization.
#[derive(Debug, Clone)]
pub struct InitConfig {
    /// Iterative strategy that drives exploration. Must not be the
    /// table-driven strategy itself.
    pub fallback: StrategyKind,
    pub decisions_per_session: u32,
    pub max_rounds: u32,
    pub seed: u64,
    pub bounds: Bounds,
    pub estimator_window: usize,
    pub estimator_min_samples: usize,
    /// Estimator dead-band around the target, as a fraction of the target.
    pub tolerance_frac: f64,
}

impl Default for InitConfig {
    fn default() -> Self {
        Self {
            fallback: StrategyKind::ItbsNr,
            decisions_per_session: 60,
            max_rounds: 32,
            seed: 0,
            bounds: Bounds::default(),
            estimator_window: 20,
            estimator_min_samples: 5,
            tolerance_frac: 0.5,
        }
    }
}

/// What an initialization run produced.
#[derive(Debug, Clone)]
pub struct InitReport {
    /// Rounds executed before every stored row matched the exhaustive
    /// reference.
    pub rounds: u32,
    /// Keys written or improved.
    pub populated: Vec<LutKey>,
    /// Sessions whose cell no assignment can serve.
    pub unreachable: Vec<InitSession>,
}

/// Populates a table by replaying adaptation sessions with an iterative
/// fallback strategy, storing the cheapest feasible assignment each walk
/// visits, until a full audit finds every stored row matching the exhaustive
/// reference. Rows are keyed by the achieved bler of the stored assignment,
/// evaluated at the session's SNR snapped down to the table grid.
pub fn initialize_exploratory(
    lut: &mut Lut,
    oracle: &BlerOracle,
    table: &ResourceTable,
    sessions: &[InitSession],
    cfg: &InitConfig,
) -> Result<InitReport, LutError> {
    if cfg.fallback == StrategyKind::Luts {
        return Err(LutError::InvalidFallback(cfg.fallback));
    }
    cfg.bounds.validate()?;
    let mut populated: BTreeSet<LutKey> = BTreeSet::new();
    let mut unreachable: BTreeSet<usize> = BTreeSet::new();
    if sessions.is_empty() {
        return Ok(InitReport {
            rounds: 0,
            populated: Vec::new(),
            unreachable: Vec::new(),
        });
    }

    for round in 1..=cfg.max_rounds {
        let mut all_optimal = true;

        for (s_idx, session) in sessions.iter().enumerate() {
            let snr_q = crate::channel::snap_snr_down(session.true_snr_db, lut.snr_step_db());
            let visited = run_fallback_walk(
                oracle,
                session,
                cfg,
                derive_seed(derive_seed(cfg.seed, u64::from(round)), s_idx as u64),
            )?;

            // Evaluate every visited assignment at the quantized SNR.
            let snr_cell = Snr::new(snr_q)?;
            let mut evals: Vec<(LinkParams, f64, u32)> = Vec::new();
            for &params in &visited {
                let rus = match table.total_rus(session.tbs, params) {
                    Ok(r) => r,
                    Err(ChannelError::TbsTooLarge { .. }) => continue,
                    Err(e) => return Err(e.into()),
                };
                match oracle.bler(session.tbs, snr_cell, params) {
                    Ok(bler) => evals.push((params, bler, rus)),
                    Err(ChannelError::MissingGridRow { .. }) => {}
                    Err(e) => return Err(e.into()),
                }
            }

            match cheapest_feasible(&evals, session.bler_t) {
                Some((params, bler, rus)) => {
                    let key = LutKey::new(session.tbs, snr_q, bler)?;
                    let entry = LutEntry {
                        itbs: params.itbs(),
                        nr: params.nr(),
                        bler,
                        rus,
                    };
                    if lut.set_row(key, entry)? {
                        populated.insert(key);
                    }
                    // Let this walk improve every stored target of the cell.
                    let cell_keys: Vec<LutKey> = lut
                        .rows
                        .range(
                            LutKey {
                                tbs: session.tbs,
                                snr_mdb: snr_mdb(snr_q),
                                bler_t: f64::NEG_INFINITY,
                            }..=LutKey {
                                tbs: session.tbs,
                                snr_mdb: snr_mdb(snr_q),
                                bler_t: f64::INFINITY,
                            },
                        )
                        .map(|(k, _)| *k)
                        .collect();
                    for cell_key in cell_keys {
                        if let Some((p, b, r)) = cheapest_feasible(&evals, cell_key.bler_t()) {
                            let improved = lut.set_row(
                                cell_key,
                                LutEntry {
                                    itbs: p.itbs(),
                                    nr: p.nr(),
                                    bler: b,
                                    rus: r,
                                },
                            )?;
                            if improved {
                                populated.insert(cell_key);
                            }
                        }
                    }
                }
                None => {
                    match brute_force_optimal(oracle, table, session.tbs, snr_cell, session.bler_t)
                    {
                        Ok(_) => all_optimal = false,
                        Err(LutError::EmptyCandidates { .. }) => {
                            unreachable.insert(s_idx);
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
        }

        // Audit: every stored row must match the exhaustive reference.
        let stored: Vec<(LutKey, LutEntry)> =
            lut.rows.iter().map(|(k, e)| (*k, *e)).collect();
        for (key, entry) in stored {
            let opt =
                brute_force_optimal(oracle, table, key.tbs(), Snr::new(key.snr_db())?, key.bler_t())?;
            if opt.itbs == entry.itbs && opt.nr == entry.nr {
                continue;
            }
            debug_assert!(opt.rus <= entry.rus);
            if opt.rus == entry.rus {
                // Same cost, different assignment: canonicalize the tie.
                lut.set_row_forced(key, opt)?;
                populated.insert(key);
            } else {
                all_optimal = false;
            }
        }

        if all_optimal {
            return Ok(InitReport {
                rounds: round,
                populated: populated.into_iter().collect(),
                unreachable: unreachable.into_iter().map(|i| sessions[i]).collect(),
            });
        }
    }

    Err(LutError::NonConvergence {
        max_rounds: cfg.max_rounds,
    })
}

fn cheapest_feasible(
    evals: &[(LinkParams, f64, u32)],
    bler_t: f64,
) -> Option<(LinkParams, f64, u32)> {
    evals
        .iter()
        .filter(|&&(_, bler, _)| bler <= bler_t)
        .min_by(|a, b| {
            a.2.cmp(&b.2)
                .then(a.0.nr().cmp(&b.0.nr()))
                .then(a.0.itbs().cmp(&b.0.itbs()))
        })
        .copied()
}

/// Replays one adaptation session against the oracle at the true SNR and
/// returns every assignment the walk used, including the starting one.
fn run_fallback_walk(
    oracle: &BlerOracle,
    session: &InitSession,
    cfg: &InitConfig,
    seed: u64,
) -> Result<BTreeSet<LinkParams>, LutError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut estimator = BlerEstimator::new(cfg.estimator_window, cfg.estimator_min_samples);
    let mut params = initial_params(cfg.fallback, &cfg.bounds, cfg.bounds.nr_max)?;
    let mut visited: BTreeSet<LinkParams> = BTreeSet::new();
    visited.insert(params);
    let true_snr = Snr::new(session.true_snr_db)?;

    for _ in 0..cfg.decisions_per_session {
        let ctx = DecisionContext {
            current: params,
            bler_est: estimator.estimate(),
            snr_est: None,
            bler_t: session.bler_t,
            tbs: session.tbs,
            tolerance: session.bler_t * cfg.tolerance_frac,
        };
        params = decide(cfg.fallback, &ctx, &cfg.bounds, None).params;
        visited.insert(params);
        let bler = match oracle.bler(session.tbs, true_snr, params) {
            Ok(b) => b,
            // Unsampled corners count as certain failure while exploring.
            Err(ChannelError::MissingGridRow { .. }) => 1.0,
            Err(e) => return Err(e.into()),
        };
        let outcome = draw_block_outcome(bler, &mut rng);
        estimator.update(outcome == BlockOutcome::Failure);
    }
    Ok(visited)
}
