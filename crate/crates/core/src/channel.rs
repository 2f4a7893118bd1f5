//! Payload and resource-unit tables for single sub-carrier NPUSCH uplink,
//! plus the pluggable block-error-rate oracle standing in for the physical
//! layer.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::Rng;
use thiserror::Error;

/// Block-error-rate samples for a 256-bit block at -24 dB, a starter grid
/// for the tabulated oracle.
pub const SAMPLE_BLER_GRID_CSV: &str = include_str!("../data/sample_bler_grid.csv");

/// Valid repetition counts for an uplink transmission.
pub const NR_VALUES: [u32; 8] = [1, 2, 4, 8, 16, 32, 64, 128];

/// Resource-unit slot counts a single transmission may occupy.
pub const RU_SLOT_COUNTS: [u32; 8] = [1, 2, 3, 4, 5, 6, 8, 10];

// Payload bits per (I_TBS row, RU slot column) in single sub-carrier mode,
// from 3GPP TS 36.213 table 16.5.1.2-2, restricted to the four lowest rows.
const PAYLOAD_BITS: [[u32; 8]; 4] = [
    [16, 32, 56, 88, 120, 152, 208, 256],
    [24, 56, 88, 144, 176, 208, 256, 344],
    [32, 72, 144, 176, 208, 256, 328, 424],
    [40, 104, 176, 208, 256, 328, 440, 568],
];

// MCS index carried in the uplink grant for each I_TBS row.
const MCS_OF_ITBS: [u8; 4] = [0, 2, 1, 3];

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("no payload cell for itbs {itbs} at {ru_slots} slots")]
    UnknownCell { itbs: u8, ru_slots: u32 },
    #[error("tbs {tbs} exceeds the largest payload {max} for itbs {itbs}")]
    TbsTooLarge { tbs: u32, itbs: u8, max: u32 },
    #[error("no bler sample for tbs {tbs}, snr {snr_db} dB, itbs {itbs}, nr {nr}")]
    MissingGridRow { tbs: u32, snr_db: f64, itbs: u8, nr: u32 },
    #[error("repetition count {0} is not a power of two in [1, 128]")]
    InvalidNr(u32),
    #[error("snr must be finite, got {0}")]
    NonFiniteSnr(f64),
    #[error("{context} out of range: {value}")]
    OutOfRange { context: &'static str, value: f64 },
    #[error("payload not strictly increasing at itbs {itbs}, {ru_slots} slots")]
    NonMonotonePayload { itbs: u8, ru_slots: u32 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A scheduled (I_TBS, repetition count) assignment for one transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinkParams {
    itbs: u8,
    nr: u32,
}

impl LinkParams {
    pub fn new(itbs: u8, nr: u32) -> Result<Self, ChannelError> {
        if !NR_VALUES.contains(&nr) {
            return Err(ChannelError::InvalidNr(nr));
        }
        Ok(Self { itbs, nr })
    }

    pub fn itbs(self) -> u8 {
        self.itbs
    }

    pub fn nr(self) -> u32 {
        self.nr
    }
}

impl fmt::Display for LinkParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(itbs {}, nr {})", self.itbs, self.nr)
    }
}

/// Signal-to-noise ratio in dB. Always finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Snr(f64);

impl Snr {
    pub fn new(db: f64) -> Result<Self, ChannelError> {
        if !db.is_finite() {
            return Err(ChannelError::NonFiniteSnr(db));
        }
        Ok(Self(db))
    }

    pub fn db(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Snr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} dB", self.0)
    }
}

/// Snaps an SNR down to the nearest multiple of `step_db` (pessimistic
/// quantization). A small guard keeps values sitting exactly on a grid
/// point from falling one cell below through float noise.
pub fn snap_snr_down(db: f64, step_db: f64) -> f64 {
    ((db / step_db) + 1e-9).floor() * step_db
}

/// Payload lookup for every (I_TBS, RU slot count) cell, the MCS
/// correspondence, and the RU-cost arithmetic built on them.
#[derive(Debug, Clone)]
pub struct ResourceTable {
    payload: BTreeMap<(u8, u32), u32>,
    mcs_of_itbs: BTreeMap<u8, u8>,
    itbs_max: u8,
}

impl Default for ResourceTable {
    fn default() -> Self {
        let mut payload = BTreeMap::new();
        for (itbs, row) in PAYLOAD_BITS.iter().enumerate() {
            for (col, &bits) in row.iter().enumerate() {
                payload.insert((itbs as u8, RU_SLOT_COUNTS[col]), bits);
            }
        }
        let mcs_of_itbs = MCS_OF_ITBS
            .iter()
            .enumerate()
            .map(|(itbs, &mcs)| (itbs as u8, mcs))
            .collect();
        Self {
            payload,
            mcs_of_itbs,
            itbs_max: 3,
        }
    }
}

impl ResourceTable {
    pub fn itbs_max(&self) -> u8 {
        self.itbs_max
    }

    pub fn mcs_of_itbs(&self, itbs: u8) -> Option<u8> {
        self.mcs_of_itbs.get(&itbs).copied()
    }

    /// Payload bits of one table cell.
    pub fn payload_bits(&self, itbs: u8, ru_slots: u32) -> Result<u32, ChannelError> {
        self.payload
            .get(&(itbs, ru_slots))
            .copied()
            .ok_or(ChannelError::UnknownCell { itbs, ru_slots })
    }

    /// Smallest slot count whose payload holds `tbs` bits at the given
    /// coding row, disregarding repetitions.
    pub fn rus_no_rep(&self, tbs: u32, itbs: u8) -> Result<u32, ChannelError> {
        let mut max_payload = 0;
        for &slots in &RU_SLOT_COUNTS {
            if let Some(&bits) = self.payload.get(&(itbs, slots)) {
                if bits >= tbs {
                    return Ok(slots);
                }
                max_payload = max_payload.max(bits);
            }
        }
        Err(ChannelError::TbsTooLarge {
            tbs,
            itbs,
            max: max_payload,
        })
    }

    /// RU cost of one transmission: slots per repetition times repetitions.
    pub fn total_rus(&self, tbs: u32, params: LinkParams) -> Result<u32, ChannelError> {
        Ok(self.rus_no_rep(tbs, params.itbs())? * params.nr())
    }

    /// Replacement table from CSV with header `itbs,ru_slots,tbs_bits`.
    pub fn from_override_csv(text: &str) -> Result<Self, ChannelError> {
        let mut payload = BTreeMap::new();
        let mut itbs_max = 0u8;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let row = raw.trim();
            if row.is_empty() {
                continue;
            }
            if idx == 0 {
                if row != "itbs,ru_slots,tbs_bits" {
                    return Err(ChannelError::Parse {
                        line,
                        msg: format!("expected header itbs,ru_slots,tbs_bits, got {row}"),
                    });
                }
                continue;
            }
            let fields: Vec<&str> = row.split(',').collect();
            if fields.len() != 3 {
                return Err(ChannelError::Parse {
                    line,
                    msg: format!("expected 3 fields, got {}", fields.len()),
                });
            }
            let parse_err = |what: &str, v: &str| ChannelError::Parse {
                line,
                msg: format!("bad {what}: {v}"),
            };
            let itbs: u8 = fields[0].trim().parse().map_err(|_| parse_err("itbs", fields[0]))?;
            let ru_slots: u32 = fields[1]
                .trim()
                .parse()
                .map_err(|_| parse_err("ru_slots", fields[1]))?;
            let bits: u32 = fields[2]
                .trim()
                .parse()
                .map_err(|_| parse_err("tbs_bits", fields[2]))?;
            if !RU_SLOT_COUNTS.contains(&ru_slots) {
                return Err(ChannelError::Parse {
                    line,
                    msg: format!("ru_slots {ru_slots} is not one of 1,2,3,4,5,6,8,10"),
                });
            }
            if payload.insert((itbs, ru_slots), bits).is_some() {
                return Err(ChannelError::Parse {
                    line,
                    msg: format!("duplicate cell itbs {itbs}, {ru_slots} slots"),
                });
            }
            itbs_max = itbs_max.max(itbs);
        }
        let mcs_of_itbs = (0..=itbs_max)
            .map(|i| (i, if usize::from(i) < MCS_OF_ITBS.len() { MCS_OF_ITBS[usize::from(i)] } else { i }))
            .collect();
        let table = Self {
            payload,
            mcs_of_itbs,
            itbs_max,
        };
        table.validate_monotone()?;
        Ok(table)
    }

    pub fn load_override<P: AsRef<Path>>(path: P) -> Result<Self, ChannelError> {
        Self::from_override_csv(&std::fs::read_to_string(path)?)
    }

    fn validate_monotone(&self) -> Result<(), ChannelError> {
        let mut prev: Option<((u8, u32), u32)> = None;
        for (&(itbs, slots), &bits) in &self.payload {
            if let Some(((p_itbs, _), p_bits)) = prev {
                if p_itbs == itbs && bits <= p_bits {
                    return Err(ChannelError::NonMonotonePayload { itbs, ru_slots: slots });
                }
            }
            prev = Some(((itbs, slots), bits));
        }
        for &slots in &RU_SLOT_COUNTS {
            let mut col_prev: Option<u32> = None;
            for itbs in 0..=self.itbs_max {
                if let Some(&bits) = self.payload.get(&(itbs, slots)) {
                    if col_prev.is_some_and(|p| bits <= p) {
                        return Err(ChannelError::NonMonotonePayload { itbs, ru_slots: slots });
                    }
                    col_prev = Some(bits);
                }
            }
        }
        Ok(())
    }
}

/// Logistic BLER model over an effective SNR: repetitions contribute
/// 10*log10(nr) dB of gain and each I_TBS step above zero costs a fixed
/// penalty. Block size is not modeled; the curve is calibrated at `tbs_ref`
/// and applied to any queried size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticAwgn {
    pub snr50_db: f64,
    pub slope: f64,
    pub itbs_penalty_db: f64,
    pub tbs_ref: u32,
}

impl Default for SyntheticAwgn {
    fn default() -> Self {
        Self {
            snr50_db: -11.0,
            slope: 1.5,
            itbs_penalty_db: 5.0,
            tbs_ref: 256,
        }
    }
}

impl SyntheticAwgn {
    pub fn effective_snr_db(&self, snr: Snr, params: LinkParams) -> f64 {
        snr.db() + 10.0 * f64::from(params.nr()).log10()
            - self.itbs_penalty_db * f64::from(params.itbs())
    }

    pub fn bler(&self, snr: Snr, params: LinkParams) -> f64 {
        let eff = self.effective_snr_db(snr, params);
        1.0 / (1.0 + (self.slope * (eff - self.snr50_db)).exp())
    }
}

/// Tabulated BLER samples on a (tbs, snr, itbs, nr) lattice. Lookups snap
/// the query SNR down to the grid step. SNR is keyed in milli-dB so grid
/// points compare exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct BlerGrid {
    rows: BTreeMap<(u32, i64, u8, u32), f64>,
    snr_step_db: f64,
}

pub(crate) fn snr_mdb(db: f64) -> i64 {
    (db * 1000.0).round() as i64
}

impl BlerGrid {
    pub fn new(snr_step_db: f64) -> Result<Self, ChannelError> {
        if !(snr_step_db.is_finite() && snr_step_db > 0.0) {
            return Err(ChannelError::OutOfRange {
                context: "snr_step_db",
                value: snr_step_db,
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

    pub fn insert(
        &mut self,
        tbs: u32,
        snr_db: f64,
        itbs: u8,
        nr: u32,
        bler: f64,
    ) -> Result<(), ChannelError> {
        if !snr_db.is_finite() {
            return Err(ChannelError::NonFiniteSnr(snr_db));
        }
        if !NR_VALUES.contains(&nr) {
            return Err(ChannelError::InvalidNr(nr));
        }
        if !(0.0..=1.0).contains(&bler) {
            return Err(ChannelError::OutOfRange {
                context: "bler",
                value: bler,
            });
        }
        self.rows.insert((tbs, snr_mdb(snr_db), itbs, nr), bler);
        Ok(())
    }

    pub fn get(&self, tbs: u32, snr_db: f64, itbs: u8, nr: u32) -> Option<f64> {
        self.rows.get(&(tbs, snr_mdb(snr_db), itbs, nr)).copied()
    }

    /// Grid from CSV with header `tbs,snr_db,itbs,nr,bler`.
    pub fn from_csv_str(text: &str, snr_step_db: f64) -> Result<Self, ChannelError> {
        let mut grid = Self::new(snr_step_db)?;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let row = raw.trim();
            if row.is_empty() {
                continue;
            }
            if idx == 0 {
                if row != "tbs,snr_db,itbs,nr,bler" {
                    return Err(ChannelError::Parse {
                        line,
                        msg: format!("expected header tbs,snr_db,itbs,nr,bler, got {row}"),
                    });
                }
                continue;
            }
            let fields: Vec<&str> = row.split(',').collect();
            if fields.len() != 5 {
                return Err(ChannelError::Parse {
                    line,
                    msg: format!("expected 5 fields, got {}", fields.len()),
                });
            }
            let parse_err = |what: &str, v: &str| ChannelError::Parse {
                line,
                msg: format!("bad {what}: {v}"),
            };
            let tbs: u32 = fields[0].trim().parse().map_err(|_| parse_err("tbs", fields[0]))?;
            let snr_db: f64 = fields[1]
                .trim()
                .parse()
                .map_err(|_| parse_err("snr_db", fields[1]))?;
            let itbs: u8 = fields[2].trim().parse().map_err(|_| parse_err("itbs", fields[2]))?;
            let nr: u32 = fields[3].trim().parse().map_err(|_| parse_err("nr", fields[3]))?;
            let bler: f64 = fields[4]
                .trim()
                .parse()
                .map_err(|_| parse_err("bler", fields[4]))?;
            grid.insert(tbs, snr_db, itbs, nr, bler)
                .map_err(|e| ChannelError::Parse {
                    line,
                    msg: e.to_string(),
                })?;
        }
        Ok(grid)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("tbs,snr_db,itbs,nr,bler\n");
        for (&(tbs, mdb, itbs, nr), &bler) in &self.rows {
            let snr_db = mdb as f64 / 1000.0;
            out.push_str(&format!("{tbs},{snr_db},{itbs},{nr},{bler}\n"));
        }
        out
    }

    pub fn load<P: AsRef<Path>>(path: P, snr_step_db: f64) -> Result<Self, ChannelError> {
        Self::from_csv_str(&std::fs::read_to_string(path)?, snr_step_db)
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<(), ChannelError> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }
}

/// The physical-layer abstraction: answers with a block error rate for any
/// (tbs, snr, link params) query.
#[derive(Debug, Clone)]
pub enum BlerOracle {
    Tabulated(BlerGrid),
    SyntheticAwgn(SyntheticAwgn),
}

impl BlerOracle {
    pub fn bler(&self, tbs: u32, snr: Snr, params: LinkParams) -> Result<f64, ChannelError> {
        match self {
            BlerOracle::Tabulated(grid) => {
                let snapped = snap_snr_down(snr.db(), grid.snr_step_db());
                grid.get(tbs, snapped, params.itbs(), params.nr()).ok_or(
                    ChannelError::MissingGridRow {
                        tbs,
                        snr_db: snapped,
                        itbs: params.itbs(),
                        nr: params.nr(),
                    },
                )
            }
            BlerOracle::SyntheticAwgn(model) => Ok(model.bler(snr, params)),
        }
    }
}

/// Outcome of one transmission attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockOutcome {
    Success,
    Failure,
}

/// Bernoulli realization of a block error.
pub fn draw_block_outcome<R: Rng + ?Sized>(bler: f64, rng: &mut R) -> BlockOutcome {
    if rng.random::<f64>() < bler {
        BlockOutcome::Failure
    } else {
        BlockOutcome::Success
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lattice() -> Vec<LinkParams> {
        let mut out = Vec::new();
        for itbs in 0..=3u8 {
            for &nr in &NR_VALUES {
                out.push(LinkParams::new(itbs, nr).unwrap());
            }
        }
        out
    }

    #[test]
    fn payload_matches_standard_exactly() {
        let table = ResourceTable::default();
        for (itbs, row) in PAYLOAD_BITS.iter().enumerate() {
            for (col, &bits) in row.iter().enumerate() {
                assert_eq!(
                    table.payload_bits(itbs as u8, RU_SLOT_COUNTS[col]).unwrap(),
                    bits
                );
            }
        }
        assert_eq!(table.payload_bits(0, 1).unwrap(), 16);
        assert_eq!(table.payload_bits(3, 10).unwrap(), 568);
        assert_eq!(table.payload_bits(0, 10).unwrap(), 256);
    }

    #[test]
    fn unknown_cells_are_rejected() {
        let table = ResourceTable::default();
        assert!(matches!(
            table.payload_bits(0, 7),
            Err(ChannelError::UnknownCell { ru_slots: 7, .. })
        ));
        assert!(matches!(
            table.payload_bits(4, 1),
            Err(ChannelError::UnknownCell { itbs: 4, .. })
        ));
    }

    #[test]
    fn mcs_correspondence_is_the_expected_bijection() {
        let table = ResourceTable::default();
        let expect = [(0u8, 0u8), (1, 2), (2, 1), (3, 3)];
        for (itbs, mcs) in expect {
            assert_eq!(table.mcs_of_itbs(itbs), Some(mcs));
        }
        let mut seen: Vec<u8> = expect.iter().map(|&(_, m)| m).collect();
        seen.sort_unstable();
        assert_eq!(seen, vec![0, 1, 2, 3]);
    }

    #[test]
    fn rus_no_rep_picks_smallest_sufficient_cell() {
        let table = ResourceTable::default();
        assert_eq!(table.rus_no_rep(256, 0).unwrap(), 10);
        assert_eq!(table.rus_no_rep(256, 1).unwrap(), 8);
        assert_eq!(table.rus_no_rep(256, 2).unwrap(), 6);
        assert_eq!(table.rus_no_rep(256, 3).unwrap(), 5);
        assert_eq!(table.rus_no_rep(16, 0).unwrap(), 1);
        assert_eq!(table.rus_no_rep(17, 0).unwrap(), 2);
    }

    #[test]
    fn oversized_tbs_is_rejected() {
        let table = ResourceTable::default();
        assert!(matches!(
            table.rus_no_rep(257, 0),
            Err(ChannelError::TbsTooLarge { max: 256, .. })
        ));
        assert!(matches!(
            table.rus_no_rep(569, 3),
            Err(ChannelError::TbsTooLarge { max: 568, .. })
        ));
    }

    #[test]
    fn total_rus_reproduces_known_costs() {
        let table = ResourceTable::default();
        let cases = [
            (0u8, 128u32, 1280u32),
            (1, 128, 1024),
            (2, 128, 768),
            (0, 64, 640),
            (0, 1, 10),
        ];
        for (itbs, nr, rus) in cases {
            let params = LinkParams::new(itbs, nr).unwrap();
            assert_eq!(table.total_rus(256, params).unwrap(), rus);
        }
    }

    #[test]
    fn total_rus_doubles_with_nr() {
        let table = ResourceTable::default();
        for itbs in 0..=3u8 {
            for &nr in &NR_VALUES[..NR_VALUES.len() - 1] {
                let a = table.total_rus(256, LinkParams::new(itbs, nr).unwrap()).unwrap();
                let b = table
                    .total_rus(256, LinkParams::new(itbs, nr * 2).unwrap())
                    .unwrap();
                assert_eq!(b, 2 * a);
            }
        }
    }

    #[test]
    fn invalid_nr_is_rejected() {
        assert!(matches!(LinkParams::new(0, 3), Err(ChannelError::InvalidNr(3))));
        assert!(matches!(LinkParams::new(0, 256), Err(ChannelError::InvalidNr(256))));
        assert!(matches!(LinkParams::new(0, 0), Err(ChannelError::InvalidNr(0))));
    }

    #[test]
    fn synthetic_midpoint_is_half() {
        let model = SyntheticAwgn::default();
        let params = LinkParams::new(0, 1).unwrap();
        let snr = Snr::new(model.snr50_db).unwrap();
        assert!((model.bler(snr, params) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn synthetic_is_monotone_over_the_lattice() {
        let model = SyntheticAwgn::default();
        for snr_db in [-30.0, -24.0, -20.0, -16.0, -10.0] {
            let snr = Snr::new(snr_db).unwrap();
            let up = Snr::new(snr_db + 0.5).unwrap();
            for params in lattice() {
                let b = model.bler(snr, params);
                assert!((0.0..=1.0).contains(&b));
                assert!(model.bler(up, params) <= b);
                if params.nr() < 128 {
                    let more_rep = LinkParams::new(params.itbs(), params.nr() * 2).unwrap();
                    assert!(model.bler(snr, more_rep) <= b);
                }
                if params.itbs() < 3 {
                    let higher_rate = LinkParams::new(params.itbs() + 1, params.nr()).unwrap();
                    assert!(model.bler(snr, higher_rate) >= b);
                }
            }
        }
    }

    #[test]
    fn doubling_nr_equals_three_db_gain() {
        let model = SyntheticAwgn::default();
        for snr_db in [-24.0, -20.0, -16.0] {
            for params in lattice() {
                if params.nr() >= 128 {
                    continue;
                }
                let doubled = LinkParams::new(params.itbs(), params.nr() * 2).unwrap();
                let shifted = Snr::new(snr_db + 10.0 * 2.0f64.log10()).unwrap();
                let a = model.bler(shifted, params);
                let b = model.bler(Snr::new(snr_db).unwrap(), doubled);
                assert!((a - b).abs() <= 1e-12 * a.max(b).max(f64::MIN_POSITIVE));
            }
        }
    }

    #[test]
    fn grid_snaps_query_snr_down() {
        let mut grid = BlerGrid::new(1.0).unwrap();
        grid.insert(256, -24.0, 0, 128, 0.00006).unwrap();
        grid.insert(256, -23.0, 0, 128, 0.00001).unwrap();
        let oracle = BlerOracle::Tabulated(grid);
        let params = LinkParams::new(0, 128).unwrap();
        let q = |db: f64| oracle.bler(256, Snr::new(db).unwrap(), params).unwrap();
        assert_eq!(q(-24.0), 0.00006);
        assert_eq!(q(-23.5), 0.00006);
        assert_eq!(q(-23.0), 0.00001);
        assert_eq!(q(-22.1), 0.00001);
        assert!(matches!(
            oracle.bler(256, Snr::new(-24.5).unwrap(), params),
            Err(ChannelError::MissingGridRow { .. })
        ));
    }

    #[test]
    fn snap_snr_down_handles_boundaries() {
        assert_eq!(snap_snr_down(-24.0, 1.0), -24.0);
        assert_eq!(snap_snr_down(-23.2, 1.0), -24.0);
        assert_eq!(snap_snr_down(-23.999_999_999_9, 1.0), -24.0);
        assert_eq!(snap_snr_down(-24.000_000_000_1, 1.0), -24.0);
        assert_eq!(snap_snr_down(-23.7, 0.5), -24.0);
        assert_eq!(snap_snr_down(-16.0, 1.0), -16.0);
        assert_eq!(snap_snr_down(3.4, 1.0), 3.0);
    }

    #[test]
    fn grid_csv_round_trips() {
        let mut grid = BlerGrid::new(1.0).unwrap();
        grid.insert(256, -24.0, 0, 128, 0.00006).unwrap();
        grid.insert(256, -24.0, 2, 128, 0.70477).unwrap();
        grid.insert(256, -20.0, 0, 1, 1.0).unwrap();
        let text = grid.to_csv_string();
        let back = BlerGrid::from_csv_str(&text, 1.0).unwrap();
        assert_eq!(back, grid);
        assert_eq!(back.to_csv_string(), text);
    }

    #[test]
    fn malformed_grid_rows_carry_line_numbers() {
        let text = "tbs,snr_db,itbs,nr,bler\n256,-24,0,128,not-a-number\n";
        match BlerGrid::from_csv_str(text, 1.0) {
            Err(ChannelError::Parse { line: 2, .. }) => {}
            other => panic!("expected parse error on line 2, got {other:?}"),
        }
        let text = "tbs,snr_db,itbs,nr,bler\n256,-24,0,128,1.5\n";
        assert!(matches!(
            BlerGrid::from_csv_str(text, 1.0),
            Err(ChannelError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn override_table_replaces_payloads() {
        let csv = "itbs,ru_slots,tbs_bits\n0,1,16\n0,2,32\n1,1,24\n1,2,56\n";
        let table = ResourceTable::from_override_csv(csv).unwrap();
        assert_eq!(table.itbs_max(), 1);
        assert_eq!(table.payload_bits(0, 2).unwrap(), 32);
        assert_eq!(table.rus_no_rep(20, 1).unwrap(), 1);
        assert!(table.payload_bits(0, 10).is_err());
        assert_eq!(table.mcs_of_itbs(1), Some(2));
    }

    #[test]
    fn override_table_rejects_non_monotone_rows() {
        let csv = "itbs,ru_slots,tbs_bits\n0,1,16\n0,2,12\n";
        assert!(matches!(
            ResourceTable::from_override_csv(csv),
            Err(ChannelError::NonMonotonePayload { .. })
        ));
        let csv = "itbs,ru_slots,tbs_bits\n0,1,16\n1,1,10\n";
        assert!(matches!(
            ResourceTable::from_override_csv(csv),
            Err(ChannelError::NonMonotonePayload { .. })
        ));
    }

    #[test]
    fn degenerate_bler_draws_are_certain() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            assert_eq!(draw_block_outcome(0.0, &mut rng), BlockOutcome::Success);
            assert_eq!(draw_block_outcome(1.0, &mut rng), BlockOutcome::Failure);
        }
    }

    #[test]
    fn draw_frequency_matches_bler() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 1_000_000u32;
        let failures = (0..n)
            .filter(|_| draw_block_outcome(0.5, &mut rng) == BlockOutcome::Failure)
            .count();
        let fraction = failures as f64 / f64::from(n);
        assert!((fraction - 0.5).abs() < 0.002, "got {fraction}");
    }

    proptest! {
        #[test]
        fn snap_never_exceeds_input(db in -60.0f64..20.0, step_idx in 0usize..3) {
            let step = [0.5, 1.0, 2.0][step_idx];
            let snapped = snap_snr_down(db, step);
            prop_assert!(snapped <= db + step * 1e-6);
            prop_assert!(db - snapped < step + step * 1e-6);
        }

        #[test]
        fn rus_no_rep_is_minimal(tbs in 1u32..=568, itbs in 0u8..=3) {
            let table = ResourceTable::default();
            match table.rus_no_rep(tbs, itbs) {
                Ok(slots) => {
                    prop_assert!(table.payload_bits(itbs, slots).unwrap() >= tbs);
                    let smaller: Vec<u32> = RU_SLOT_COUNTS.iter().copied().filter(|&s| s < slots).collect();
                    for s in smaller {
                        prop_assert!(table.payload_bits(itbs, s).unwrap() < tbs);
                    }
                }
                Err(_) => {
                    prop_assert!(tbs > table.payload_bits(itbs, 10).unwrap());
                }
            }
        }
    }
}
