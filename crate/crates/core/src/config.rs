//! Scenario configuration: a nested TOML file whose every key is optional.
//! An empty file resolves to the reference parameter set.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::Vec3;
use crate::convergence::{GammaSchedule, TimeCombine};
use crate::error::{Error, Result};
use crate::learner::LearnerConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub fleet: FleetConfig,
    pub radio: RadioConfig,
    pub learning: LearningConfig,
    pub convergence: ConvergenceConfig,
    pub eval: EvalConfig,
    pub seeds: SeedConfig,
}

/// Fleet size, resources and where the UAVs fly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FleetConfig {
    /// Number of UAVs `G`.
    pub size: usize,
    /// Resource blocks `𝔅`, one per sharing edge.
    pub resource_blocks: usize,
    /// CSI records per UAV `H_g`.
    pub dataset_size: usize,
    pub ground_station: Vec3,
    pub altitude_m: f64,
    /// Horizontal range band of the orbit centers around the ground station.
    pub min_range_m: f64,
    pub max_range_m: f64,
    /// Azimuth span the fleet occupies, centered on the x axis.
    pub sector_deg: f64,
    pub orbit_radius_m: f64,
    pub orbit_period_s: f64,
    /// Time between consecutive trajectory points.
    pub sample_interval_s: f64,
    /// Explicit orbit centers; overrides the generated layout when set.
    pub positions: Option<Vec<Vec3>>,
}

impl Default for FleetConfig {
    fn default() -> Self {
        Self {
            size: 5,
            resource_blocks: 5,
            dataset_size: 10_000,
            ground_station: [0.0, 0.0, 10.0],
            altitude_m: 100.0,
            min_range_m: 150.0,
            max_range_m: 300.0,
            sector_deg: 60.0,
            orbit_radius_m: 5.0,
            orbit_period_s: 60.0,
            sample_interval_s: 0.1,
            positions: None,
        }
    }
}

/// Arrays, spectrum, power and the synthetic propagation field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    /// Transmit array size `L`.
    pub tx_antennas: usize,
    /// Receive array size `K`.
    pub rx_antennas: usize,
    /// Codebook length `I`.
    pub directions: usize,
    pub carrier_frequency_hz: f64,
    pub bandwidth_hz: f64,
    pub max_power_dbm: f64,
    pub noise_dbm_per_hz: f64,
    pub snr_threshold_db: f64,
    /// Power each UAV-to-UAV sharing link transmits at.
    pub link_tx_power_dbm: f64,
    pub pilot_power_dbm: f64,
    pub pathloss_exponent: f64,
    pub rician_k_db: f64,
    /// Beam-alignment contrast of the synthetic field, `[0, 1)`.
    pub directivity: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            tx_antennas: 256,
            rx_antennas: 64,
            directions: 81,
            carrier_frequency_hz: 30e9,
            bandwidth_hz: 2e6,
            max_power_dbm: 40.0,
            noise_dbm_per_hz: -174.0,
            snr_threshold_db: 12.0,
            link_tx_power_dbm: 30.0,
            pilot_power_dbm: 30.0,
            pathloss_exponent: 2.0,
            rician_k_db: 10.0,
            directivity: 0.5,
        }
    }
}

/// Common frame in which learners standardize gains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FrameKind {
    /// Per-direction statistics pooled over the fleet, agreed once at setup.
    #[default]
    Fleet,
    /// Each node's own per-direction statistics.
    Local,
}

/// Sharing protocol and local training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearningConfig {
    /// Sampling ratio `η`.
    pub eta: f64,
    /// Payload units per shared sample `ρ`.
    pub rho: f64,
    pub training_error: f64,
    /// Sharing slot `t_Th`, seconds.
    pub share_slot_s: f64,
    /// Local training time per round `t_fx`, seconds.
    pub local_train_time_s: f64,
    pub rounds: usize,
    /// Evaluate JSD every this many rounds (and after the last).
    pub jsd_every: usize,
    pub eps_d: f64,
    pub eps_jsd: f64,
    /// Rounds between parameter broadcasts in the averaging baseline.
    pub averaging_period: usize,
    /// Write learner checkpoints every this many rounds; 0 disables.
    pub checkpoint_every: usize,
    pub frame: FrameKind,
    pub learner: LearnerConfig,
}

impl Default for LearningConfig {
    fn default() -> Self {
        Self {
            eta: 0.5,
            rho: 11.0,
            training_error: 0.01,
            share_slot_s: 0.01,
            local_train_time_s: 0.01,
            rounds: 300,
            jsd_every: 25,
            eps_d: 0.05,
            eps_jsd: 0.05,
            averaging_period: 5,
            checkpoint_every: 0,
            frame: FrameKind::default(),
            learner: LearnerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub target_probability: f64,
    pub gamma: GammaSchedule,
    pub iteration_cap: u32,
    /// Last iteration written by curve experiments.
    pub curve_iterations: u32,
    pub time_combine: TimeCombine,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            target_probability: 0.99,
            gamma: GammaSchedule::Unit,
            iteration_cap: 10_000,
            curve_iterations: 60,
            time_combine: TimeCombine::Product,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub jsd_bins: usize,
    /// Histogram half-width in standardized units.
    pub jsd_half_width: f64,
    /// Samples per direction for each histogram.
    pub jsd_samples: usize,
    /// Fresh trajectory points per node for the beam-selection rate.
    pub rate_test_points: usize,
    pub rate_floor: f64,
    /// Generator draws per direction when ranking beams.
    pub rate_model_samples: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            jsd_bins: 32,
            jsd_half_width: 4.0,
            jsd_samples: 4000,
            rate_test_points: 50,
            rate_floor: 0.9,
            rate_model_samples: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeedConfig {
    pub master: u64,
}

impl Default for SeedConfig {
    fn default() -> Self {
        Self { master: 42 }
    }
}

fn invalid(path: &str, message: impl Into<String>) -> Error {
    Error::ConfigInvalid { path: path.into(), message: message.into() }
}

impl ScenarioConfig {
    /// Parse TOML text and check every invariant.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let message = e.message().to_string();
            let path = message
                .split('`')
                .nth(1)
                .filter(|_| message.starts_with("unknown field"))
                .map(str::to_owned)
                .unwrap_or_else(|| "<root>".into());
            Error::ConfigInvalid { path, message }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let f = &self.fleet;
        let r = &self.radio;
        let l = &self.learning;
        if f.size == 0 {
            return Err(invalid("fleet.size", "fleet needs at least one UAV"));
        }
        if f.resource_blocks < f.size {
            return Err(invalid(
                "fleet.resource_blocks",
                format!("{} resource blocks cannot serve {} UAVs", f.resource_blocks, f.size),
            ));
        }
        if f.dataset_size == 0 {
            return Err(invalid("fleet.dataset_size", "must be positive"));
        }
        if let Some(p) = &f.positions {
            if p.len() != f.size {
                return Err(invalid("fleet.positions", format!("{} positions for {} UAVs", p.len(), f.size)));
            }
        }
        if !(f.min_range_m > 0.0 && f.max_range_m >= f.min_range_m) {
            return Err(invalid("fleet.max_range_m", "range band must satisfy 0 < min <= max"));
        }
        if !(f.sample_interval_s > 0.0 && f.orbit_period_s > 0.0) {
            return Err(invalid("fleet.sample_interval_s", "times must be positive"));
        }
        if r.directions == 0 {
            return Err(invalid("radio.directions", "codebook needs at least one direction"));
        }
        if r.tx_antennas == 0 || r.rx_antennas == 0 {
            return Err(invalid("radio.tx_antennas", "antenna arrays need at least one element"));
        }
        for (path, v) in [
            ("radio.carrier_frequency_hz", r.carrier_frequency_hz),
            ("radio.bandwidth_hz", r.bandwidth_hz),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(path, format!("{v} must be positive and finite")));
            }
        }
        for (path, v) in [
            ("radio.max_power_dbm", r.max_power_dbm),
            ("radio.noise_dbm_per_hz", r.noise_dbm_per_hz),
            ("radio.snr_threshold_db", r.snr_threshold_db),
            ("radio.link_tx_power_dbm", r.link_tx_power_dbm),
            ("radio.pilot_power_dbm", r.pilot_power_dbm),
            ("radio.pathloss_exponent", r.pathloss_exponent),
        ] {
            if !v.is_finite() {
                return Err(invalid(path, format!("{v} is not finite")));
            }
        }
        if !(0.0..1.0).contains(&r.directivity) {
            return Err(invalid("radio.directivity", "must lie in [0, 1)"));
        }
        if !(0.0..=1.0).contains(&l.eta) {
            return Err(invalid("learning.eta", "must lie in [0, 1]"));
        }
        if !(0.0..1.0).contains(&l.training_error) {
            return Err(invalid("learning.training_error", "must lie in [0, 1)"));
        }
        if l.rho < 0.0 {
            return Err(invalid("learning.rho", "must be nonnegative"));
        }
        if l.learner.batch_size == 0 || l.learner.local_steps == 0 {
            return Err(invalid("learning.learner.batch_size", "batch size and local steps must be positive"));
        }
        if !(0.0..1.0).contains(&l.learner.ema_decay) {
            return Err(invalid("learning.learner.ema_decay", "must lie in [0, 1)"));
        }
        if l.averaging_period == 0 {
            return Err(invalid("learning.averaging_period", "must be positive"));
        }
        let c = &self.convergence;
        if !(0.0..1.0).contains(&c.target_probability) {
            return Err(invalid("convergence.target_probability", "must lie in [0, 1)"));
        }
        if let GammaSchedule::Linear { slope, cap } = c.gamma {
            if slope < 0.0 || cap < 1.0 {
                return Err(invalid("convergence.gamma", "needs slope >= 0 and cap >= 1"));
            }
        }
        if self.eval.jsd_bins == 0 || self.eval.jsd_samples == 0 {
            return Err(invalid("eval.jsd_bins", "histograms need bins and samples"));
        }
        Ok(())
    }
}

/// Read and validate a config file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::ConfigNotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    ScenarioConfig::from_toml_str(&text)
}

/// Deterministic child seed for a named stream and index.
pub fn derive_seed(master: u64, stream: &str, index: u64) -> u64 {
    let mut h = splitmix(master);
    for b in stream.bytes() {
        h = splitmix(h ^ u64::from(b));
    }
    splitmix(h ^ index)
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}
