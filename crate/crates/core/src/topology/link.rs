use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::channel::{distance, Vec3, SPEED_OF_LIGHT};
use crate::error::{Error, Result};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

/// `20 log10(4 pi d f / c)`.
pub fn free_space_path_loss(distance: f64, frequency: f64) -> Result<f64> {
    if distance <= 0.0 || !distance.is_finite() {
        return Err(Error::DegenerateGeometry(format!("link distance {distance} m")));
    }
    if frequency <= 0.0 {
        return Err(Error::DegenerateGeometry(format!("carrier frequency {frequency} Hz")));
    }
    Ok(20.0 * (4.0 * PI * distance * frequency / SPEED_OF_LIGHT).log10())
}

/// Air-to-air link budget between one ordered UAV pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    pub path_loss_db: f64,
    /// Noise power over the whole band, dBm.
    pub noise_power_dbm: f64,
    pub bandwidth_hz: f64,
    pub snr_threshold_db: f64,
    pub share_deadline_s: f64,
}

impl LinkBudget {
    pub fn snr_db(&self) -> f64 {
        self.tx_power_dbm - self.path_loss_db - self.noise_power_dbm
    }

    pub fn snr_linear(&self) -> f64 {
        db_to_linear(self.snr_db())
    }

    pub fn meets_threshold(&self) -> bool {
        self.snr_db() >= self.snr_threshold_db
    }
}

/// `bandwidth * log2(1 + snr)`, bits per second.
pub fn shannon_rate(budget: &LinkBudget) -> f64 {
    rate_from_snr(budget.bandwidth_hz, budget.snr_linear())
}

pub fn rate_from_snr(bandwidth_hz: f64, snr_linear: f64) -> f64 {
    if snr_linear <= 0.0 {
        return 0.0;
    }
    bandwidth_hz * (1.0 + snr_linear).log2()
}

/// Everything needed to judge whether UAV `g` may share with UAV `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkConfig {
    pub max_power_dbm: f64,
    /// Transmit power each sharing link uses.
    pub link_tx_power_dbm: f64,
    pub noise_dbm_per_hz: f64,
    pub bandwidth_hz: f64,
    pub snr_threshold_db: f64,
    pub share_deadline_s: f64,
    pub frequency_hz: f64,
    /// 2.0 is free space.
    pub pathloss_exponent: f64,
    pub eta: f64,
    pub rho: f64,
    /// Dataset size per node.
    pub dataset_sizes: Vec<usize>,
}

impl LinkConfig {
    pub fn noise_power_dbm(&self) -> f64 {
        self.noise_dbm_per_hz + linear_to_db(self.bandwidth_hz)
    }

    /// Free-space loss at 1 m plus `10 n log10(d)`.
    pub fn path_loss_db(&self, d: f64) -> Result<f64> {
        let reference = free_space_path_loss(1.0, self.frequency_hz)?;
        if d <= 0.0 {
            return Err(Error::DegenerateGeometry(format!("link distance {d} m")));
        }
        Ok(reference + 10.0 * self.pathloss_exponent * d.log10())
    }

    pub fn budget(&self, from: Vec3, to: Vec3) -> Result<LinkBudget> {
        Ok(LinkBudget {
            tx_power_dbm: self.link_tx_power_dbm,
            path_loss_db: self.path_loss_db(distance(from, to))?,
            noise_power_dbm: self.noise_power_dbm(),
            bandwidth_hz: self.bandwidth_hz,
            snr_threshold_db: self.snr_threshold_db,
            share_deadline_s: self.share_deadline_s,
        })
    }

    /// Shared payload of node `g` per round, `eta * H_g * rho`.
    pub fn payload(&self, g: usize) -> f64 {
        self.eta * self.dataset_sizes.get(g).copied().unwrap_or(0) as f64 * self.rho
    }
}

/// Transmit power, path loss and rate of one stored edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub tx_power_dbm: f64,
    pub path_loss_db: f64,
    pub rate_bps: f64,
}

impl Link {
    pub fn from_budget(b: &LinkBudget) -> Self {
        Self { tx_power_dbm: b.tx_power_dbm, path_loss_db: b.path_loss_db, rate_bps: shannon_rate(b) }
    }
}
