//! Layered TOML configuration: every tool setting with a sensible default,
//! file overrides, and the run manifest that freezes a resolved
//! configuration next to its outputs for exact reproduction.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{BlerGrid, BlerOracle, ResourceTable, SyntheticAwgn};
use crate::lut::{QosBand, QosThresholds};
use crate::sim::{RetransmissionLimit, ServiceMode, SessionConfig, SimError, SnrCadence};
use crate::strategy::{Bounds, StrategyKind, ALL_STRATEGIES};

fn config_err<T>(msg: String) -> Result<T, SimError> {
    Err(SimError::Config { msg })
}

/// Which physical-layer model answers bler queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    Synthetic,
    Tabulated,
}

/// `[oracle]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    pub kind: OracleKind,
    /// Grid CSV for the tabulated oracle.
    pub grid_path: Option<PathBuf>,
    pub snr_step_db: f64,
    pub snr50_db: f64,
    pub slope: f64,
    pub itbs_penalty_db: f64,
    pub tbs_ref: u32,
}

impl Default for OracleConfig {
    fn default() -> Self {
        let m = SyntheticAwgn::default();
        Self {
            kind: OracleKind::Synthetic,
            grid_path: None,
            snr_step_db: 1.0,
            snr50_db: m.snr50_db,
            slope: m.slope,
            itbs_penalty_db: m.itbs_penalty_db,
            tbs_ref: m.tbs_ref,
        }
    }
}

impl OracleConfig {
    pub fn build(&self) -> Result<BlerOracle, SimError> {
        match self.kind {
            OracleKind::Synthetic => Ok(BlerOracle::SyntheticAwgn(SyntheticAwgn {
                snr50_db: self.snr50_db,
                slope: self.slope,
                itbs_penalty_db: self.itbs_penalty_db,
                tbs_ref: self.tbs_ref,
            })),
            OracleKind::Tabulated => {
                let Some(path) = &self.grid_path else {
                    return config_err("the tabulated oracle needs oracle.grid_path".into());
                };
                Ok(BlerOracle::Tabulated(BlerGrid::load(path, self.snr_step_db)?))
            }
        }
    }
}

/// `[resources]` section.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ResourcesConfig {
    /// Replacement payload table CSV; the standard table when absent.
    pub override_path: Option<PathBuf>,
}

impl ResourcesConfig {
    pub fn build(&self) -> Result<ResourceTable, SimError> {
        match &self.override_path {
            None => Ok(ResourceTable::default()),
            Some(path) => Ok(ResourceTable::load_override(path)?),
        }
    }
}

/// `[lut]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LutConfig {
    pub path: Option<PathBuf>,
    pub snr_step_db: f64,
}

impl Default for LutConfig {
    fn default() -> Self {
        Self {
            path: None,
            snr_step_db: 1.0,
        }
    }
}

/// How `gen-lut` fills the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenMethod {
    Explore,
    BruteForce,
}

impl GenMethod {
    pub fn name(self) -> &'static str {
        match self {
            GenMethod::Explore => "explore",
            GenMethod::BruteForce => "brute-force",
        }
    }
}

impl fmt::Display for GenMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GenMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "explore" => Ok(GenMethod::Explore),
            "brute-force" => Ok(GenMethod::BruteForce),
            other => Err(format!(
                "unknown generation method {other:?}, expected explore or brute-force"
            )),
        }
    }
}

/// `[init]` section: the lattice of cells `gen-lut` populates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InitSection {
    pub method: GenMethod,
    pub tbs_list: Vec<u32>,
    pub snr_min_db: f64,
    pub snr_max_db: f64,
    /// QoS bands whose loosest targets become table targets.
    pub qos: Vec<String>,
    /// Extra explicit bler targets.
    pub bler_targets: Vec<f64>,
    pub decisions_per_session: u32,
    pub max_rounds: u32,
}

impl Default for InitSection {
    fn default() -> Self {
        Self {
            method: GenMethod::Explore,
            tbs_list: vec![256],
            snr_min_db: -24.0,
            snr_max_db: -16.0,
            qos: vec!["good".into()],
            bler_targets: Vec::new(),
            decisions_per_session: 60,
            max_rounds: 32,
        }
    }
}

impl InitSection {
    /// Bler targets: band maxima first, explicit extras after, deduplicated.
    pub fn targets(&self) -> Result<Vec<f64>, SimError> {
        let thresholds = QosThresholds::default();
        let mut out: Vec<f64> = Vec::new();
        for name in &self.qos {
            let band: QosBand = name
                .parse()
                .map_err(|msg: String| SimError::Config { msg })?;
            let t = thresholds.target_for(band);
            if !out.contains(&t) {
                out.push(t);
            }
        }
        for &t in &self.bler_targets {
            if !(t.is_finite() && t > 0.0 && t <= 1.0) {
                return config_err(format!("bler target {t} outside (0, 1]"));
            }
            if !out.contains(&t) {
                out.push(t);
            }
        }
        if out.is_empty() {
            return config_err("init needs at least one qos band or bler target".into());
        }
        Ok(out)
    }

    /// SNR lattice from `snr_min_db` to `snr_max_db` at the given step.
    pub fn snr_dbs(&self, step_db: f64) -> Result<Vec<f64>, SimError> {
        grid_points(self.snr_min_db, self.snr_max_db, step_db, "init snr range")
    }
}

/// `[strategy]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrategyConfig {
    pub kind: String,
    pub tolerance: Option<f64>,
    pub itbs_only_nr: u32,
    pub estimator_window: usize,
    pub estimator_min_samples: usize,
    pub itbs_max: u8,
    pub nr_min: u32,
    pub nr_max: u32,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        let b = Bounds::default();
        Self {
            kind: StrategyKind::ItbsNr.name().into(),
            tolerance: None,
            itbs_only_nr: 128,
            estimator_window: 20,
            estimator_min_samples: 5,
            itbs_max: b.itbs_max,
            nr_min: b.nr_min,
            nr_max: b.nr_max,
        }
    }
}

impl StrategyConfig {
    pub fn kind(&self) -> Result<StrategyKind, SimError> {
        self.kind
            .parse()
            .map_err(|msg: String| SimError::Config { msg })
    }

    pub fn bounds(&self) -> Bounds {
        Bounds {
            itbs_max: self.itbs_max,
            nr_min: self.nr_min,
            nr_max: self.nr_max,
        }
    }
}

/// `[session]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionSection {
    pub tbs: u32,
    pub n_blocks: u32,
    pub snr_db: f64,
    pub snr_noise_std: f64,
    pub mode: String,
    /// Total attempts per block in acknowledged mode; 0 means unbounded.
    pub max_attempts: u32,
    pub safety_cap: u32,
    pub harq_discount: f64,
    pub bler_t: f64,
    pub snr_cadence: String,
    pub seed: u64,
}

impl Default for SessionSection {
    fn default() -> Self {
        Self {
            tbs: 256,
            n_blocks: 500,
            snr_db: -24.0,
            snr_noise_std: 0.0,
            mode: ServiceMode::Unacknowledged.name().into(),
            max_attempts: 0,
            safety_cap: 64,
            harq_discount: 0.5,
            bler_t: 0.05,
            snr_cadence: SnrCadence::PerDecision.name().into(),
            seed: 1,
        }
    }
}

/// `[sweep]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSection {
    pub realizations: u32,
    pub snr_dbs: Vec<f64>,
    pub strategies: Vec<String>,
    pub modes: Vec<String>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            realizations: 500,
            snr_dbs: vec![-24.0, -20.0, -16.0],
            strategies: ALL_STRATEGIES.iter().map(|k| k.name().into()).collect(),
            modes: vec![
                ServiceMode::Unacknowledged.name().into(),
                ServiceMode::Acknowledged.name().into(),
            ],
        }
    }
}

impl SweepSection {
    pub fn strategies(&self) -> Result<Vec<StrategyKind>, SimError> {
        self.strategies
            .iter()
            .map(|s| s.parse().map_err(|msg: String| SimError::Config { msg }))
            .collect()
    }

    pub fn modes(&self) -> Result<Vec<ServiceMode>, SimError> {
        self.modes
            .iter()
            .map(|s| s.parse().map_err(|msg: String| SimError::Config { msg }))
            .collect()
    }
}

/// `[tradeoff]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TradeoffSection {
    pub loss_pct_min: f64,
    pub loss_pct_max: f64,
    pub loss_pct_step: f64,
    pub ack_attempts: u32,
    pub snr_dbs: Vec<f64>,
}

impl Default for TradeoffSection {
    fn default() -> Self {
        Self {
            loss_pct_min: 0.0,
            loss_pct_max: 100.0,
            loss_pct_step: 1.0,
            ack_attempts: 64,
            snr_dbs: vec![-24.0, -20.0, -16.0],
        }
    }
}

impl TradeoffSection {
    pub fn loss_pcts(&self) -> Result<Vec<f64>, SimError> {
        grid_points(
            self.loss_pct_min,
            self.loss_pct_max,
            self.loss_pct_step,
            "tradeoff loss range",
        )
    }
}

fn grid_points(min: f64, max: f64, step: f64, what: &str) -> Result<Vec<f64>, SimError> {
    if !(min.is_finite() && max.is_finite() && step.is_finite() && step > 0.0) {
        return config_err(format!("{what}: need finite bounds and a positive step"));
    }
    if min > max {
        return config_err(format!("{what}: min {min} above max {max}"));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| min + step * i as f64).collect())
}

/// The whole configuration tree. Every section and field is optional in a
/// file; omitted pieces take defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub oracle: OracleConfig,
    pub resources: ResourcesConfig,
    pub lut: LutConfig,
    pub strategy: StrategyConfig,
    pub session: SessionSection,
    pub sweep: SweepSection,
    pub tradeoff: TradeoffSection,
    pub init: InitSection,
}

impl Config {
    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self, SimError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| SimError::Config {
            msg: format!("{}: {e}", path.display()),
        })
    }

    pub fn to_toml_string(&self) -> Result<String, SimError> {
        toml::to_string_pretty(self).map_err(|e| SimError::Config { msg: e.to_string() })
    }

    /// The fully resolved per-session configuration.
    pub fn session_config(&self) -> Result<SessionConfig, SimError> {
        let mode: ServiceMode = self
            .session
            .mode
            .parse()
            .map_err(|msg: String| SimError::Config { msg })?;
        let snr_cadence: SnrCadence = self
            .session
            .snr_cadence
            .parse()
            .map_err(|msg: String| SimError::Config { msg })?;
        let retransmission_limit = match self.session.max_attempts {
            0 => RetransmissionLimit::Unbounded,
            n => RetransmissionLimit::Attempts(n),
        };
        Ok(SessionConfig {
            tbs: self.session.tbs,
            n_blocks: self.session.n_blocks,
            true_snr_db: self.session.snr_db,
            snr_noise_std: self.session.snr_noise_std,
            mode,
            retransmission_limit,
            safety_cap: self.session.safety_cap,
            harq_discount: self.session.harq_discount,
            bler_t: self.session.bler_t,
            tolerance: self.strategy.tolerance,
            strategy: self.strategy.kind()?,
            seed: self.session.seed,
            estimator_window: self.strategy.estimator_window,
            estimator_min_samples: self.strategy.estimator_min_samples,
            bounds: self.strategy.bounds(),
            itbs_only_nr: self.strategy.itbs_only_nr,
            snr_cadence,
        })
    }
}

/// Provenance block of a run manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestMeta {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_source: Option<String>,
    pub out_dir: String,
    pub base_seed: u64,
}

impl ManifestMeta {
    pub fn new(command: &str, config_source: Option<String>, out_dir: String, base_seed: u64) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_source,
            out_dir,
            base_seed,
        }
    }
}

/// A manifest is the resolved configuration plus a `[manifest]` block, so
/// feeding the file back as `--config` reproduces the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub manifest: ManifestMeta,
    #[serde(flatten)]
    pub config: Config,
}

impl RunManifest {
    pub fn to_toml_string(&self) -> Result<String, SimError> {
        toml::to_string_pretty(self).map_err(|e| SimError::Config { msg: e.to_string() })
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<(), SimError> {
        std::fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Snr;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = Config::default();
        let text = cfg.to_toml_string().unwrap();
        let back: Config = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn empty_and_partial_files_take_defaults() {
        let cfg: Config = toml::from_str("").unwrap();
        assert_eq!(cfg, Config::default());
        let cfg: Config = toml::from_str("[session]\nsnr_db = -16.0\nseed = 9\n").unwrap();
        assert_eq!(cfg.session.snr_db, -16.0);
        assert_eq!(cfg.session.seed, 9);
        assert_eq!(cfg.session.n_blocks, 500);
        assert_eq!(cfg.sweep, SweepSection::default());
    }

    #[test]
    fn session_config_resolves_defaults() {
        let sc = Config::default().session_config().unwrap();
        assert_eq!(sc.strategy, StrategyKind::ItbsNr);
        assert_eq!(sc.mode, ServiceMode::Unacknowledged);
        assert_eq!(sc.retransmission_limit, RetransmissionLimit::Unbounded);
        assert_eq!(sc.snr_cadence, SnrCadence::PerDecision);
        assert_eq!(sc.bounds, Bounds::default());
        assert_eq!(sc.tbs, 256);
    }

    #[test]
    fn attempt_budgets_map_to_limits() {
        let mut cfg = Config::default();
        cfg.session.max_attempts = 5;
        assert_eq!(
            cfg.session_config().unwrap().retransmission_limit,
            RetransmissionLimit::Attempts(5)
        );
    }

    #[test]
    fn bad_names_surface_as_config_errors() {
        let mut cfg = Config::default();
        cfg.session.mode = "maybe".into();
        assert!(matches!(cfg.session_config(), Err(SimError::Config { .. })));
        let mut cfg = Config::default();
        cfg.strategy.kind = "psychic".into();
        assert!(matches!(cfg.session_config(), Err(SimError::Config { .. })));
        let mut cfg = Config::default();
        cfg.sweep.strategies = vec!["itbs-nr".into(), "wat".into()];
        assert!(matches!(cfg.sweep.strategies(), Err(SimError::Config { .. })));
    }

    #[test]
    fn loss_grid_covers_the_full_range() {
        let pcts = TradeoffSection::default().loss_pcts().unwrap();
        assert_eq!(pcts.len(), 101);
        assert_eq!(pcts[0], 0.0);
        assert_eq!(pcts[5], 5.0);
        assert_eq!(pcts[100], 100.0);
        let bad = TradeoffSection {
            loss_pct_step: 0.0,
            ..TradeoffSection::default()
        };
        assert!(bad.loss_pcts().is_err());
    }

    #[test]
    fn init_lattice_expands_bands_and_snrs() {
        let init = InitSection::default();
        assert_eq!(init.targets().unwrap(), vec![0.05]);
        assert_eq!(
            init.snr_dbs(1.0).unwrap(),
            vec![-24.0, -23.0, -22.0, -21.0, -20.0, -19.0, -18.0, -17.0, -16.0]
        );
        let init = InitSection {
            qos: vec!["good".into(), "poor".into(), "bad".into()],
            bler_targets: vec![0.2, 0.05],
            ..InitSection::default()
        };
        assert_eq!(init.targets().unwrap(), vec![0.05, 0.9, 1.0, 0.2]);
        let init = InitSection {
            qos: vec![],
            bler_targets: vec![],
            ..InitSection::default()
        };
        assert!(init.targets().is_err());
    }

    #[test]
    fn synthetic_oracle_builds_from_section_fields() {
        let mut section = OracleConfig::default();
        section.snr50_db = -12.5;
        let oracle = section.build().unwrap();
        let BlerOracle::SyntheticAwgn(model) = oracle else {
            panic!("expected the synthetic oracle");
        };
        assert_eq!(model.snr50_db, -12.5);
        let params = crate::channel::LinkParams::new(0, 1).unwrap();
        assert!((model.bler(Snr::new(-12.5).unwrap(), params) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tabulated_oracle_requires_and_loads_a_grid() {
        let section = OracleConfig {
            kind: OracleKind::Tabulated,
            ..OracleConfig::default()
        };
        assert!(matches!(section.build(), Err(SimError::Config { .. })));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grid.csv");
        std::fs::write(&path, crate::channel::SAMPLE_BLER_GRID_CSV).unwrap();
        let section = OracleConfig {
            kind: OracleKind::Tabulated,
            grid_path: Some(path),
            ..OracleConfig::default()
        };
        let oracle = section.build().unwrap();
        let params = crate::channel::LinkParams::new(1, 128).unwrap();
        assert_eq!(
            oracle.bler(256, Snr::new(-24.0).unwrap(), params).unwrap(),
            0.00491
        );
    }

    #[test]
    fn resource_overrides_load_from_csv() {
        assert_eq!(
            ResourcesConfig::default().build().unwrap().itbs_max(),
            3
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.csv");
        std::fs::write(&path, "itbs,ru_slots,tbs_bits\n0,1,16\n0,2,32\n").unwrap();
        let table = ResourcesConfig {
            override_path: Some(path),
        }
        .build()
        .unwrap();
        assert_eq!(table.itbs_max(), 0);
        assert_eq!(table.payload_bits(0, 2).unwrap(), 32);
    }

    #[test]
    fn manifests_embed_and_reproduce_the_config() {
        let mut cfg = Config::default();
        cfg.session.seed = 77;
        cfg.session.snr_db = -19.0;
        let manifest = RunManifest {
            manifest: ManifestMeta::new("simulate", None, "out".into(), 77),
            config: cfg.clone(),
        };
        let text = manifest.to_toml_string().unwrap();
        assert!(text.contains("[manifest]"));
        assert!(text.contains("[session]"));
        // A manifest file works directly as a config file.
        let reread: Config = toml::from_str(&text).unwrap();
        assert_eq!(reread, cfg);
        let full: RunManifest = toml::from_str(&text).unwrap();
        assert_eq!(full, manifest);
    }

    #[test]
    fn manifest_blocks_do_not_leak_into_configs() {
        let text = "[manifest]\ntool = \"other\"\nversion = \"9\"\ncommand = \"sweep\"\nout_dir = \".\"\nbase_seed = 3\n";
        let cfg: Config = toml::from_str(text).unwrap();
        assert_eq!(cfg, Config::default());
    }
}
