//! Synthetic ground-truth gain field `A(u, v, t, direction)`.
//!
//! Log-distance path loss with a mild beam-alignment pattern sets the
//! line-of-sight component; a Rician scatter term is drawn from a stream
//! keyed by the seed and the exact inputs, so repeated queries agree bit for
//! bit.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::estimation::complex_gaussian;
use super::Vec3;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthField {
    pub pathloss_exponent: f64,
    /// Power gain at 1 m, dB.
    pub reference_gain_db: f64,
    /// Rician K-factor per direction, dB. `+inf` disables fading.
    pub rician_k_db: Vec<f64>,
    pub carrier_frequency: f64,
    /// Beam-alignment contrast in `[0, 1)`; 0 makes every direction equal.
    pub directivity: f64,
    /// Departure angle of each codebook direction, radians.
    pub directions: Vec<f64>,
    pub rng_seed: u64,
}

impl GroundTruthField {
    pub fn num_directions(&self) -> usize {
        self.directions.len()
    }

    fn check_direction(&self, direction_index: usize) -> Result<usize> {
        if direction_index == 0 || direction_index > self.directions.len() {
            return Err(Error::DirectionOutOfRange { index: direction_index, max: self.directions.len() });
        }
        Ok(direction_index - 1)
    }

    /// Linear K-factor for a 0-based direction.
    pub fn k_factor(&self, dir: usize) -> f64 {
        let db = self.rician_k_db.get(dir).or(self.rician_k_db.last()).copied().unwrap_or(f64::INFINITY);
        10f64.powf(db / 10.0)
    }

    /// Deterministic path power gain for a direction (no fading).
    pub fn path_gain(&self, u: Vec3, v: Vec3, direction_index: usize) -> Result<f64> {
        let dir = self.check_direction(direction_index)?;
        let d = distance(u, v);
        if d <= 0.0 {
            return Err(Error::DegenerateGeometry("UAV and ground station coincide".into()));
        }
        let misalignment = self.directions[dir] - bearing(u, v);
        let pattern = (1.0 + self.directivity * misalignment.cos()) / (1.0 + self.directivity);
        Ok(10f64.powf(self.reference_gain_db / 10.0) * d.powf(-self.pathloss_exponent) * pattern)
    }

    /// Line-of-sight component: amplitude `sqrt(path_gain)`, phase equal to the beam misalignment.
    pub fn line_of_sight(&self, u: Vec3, v: Vec3, direction_index: usize) -> Result<Complex64> {
        let power = self.path_gain(u, v, direction_index)?;
        let misalignment = self.directions[direction_index - 1] - bearing(u, v);
        Ok(Complex64::from_polar(power.sqrt(), misalignment))
    }
}

/// Ground-truth gain: line of sight plus `CN(0, path_gain / K)` scatter.
pub fn true_gain(field: &GroundTruthField, u: Vec3, v: Vec3, t: f64, direction_index: usize) -> Result<Complex64> {
    let los = field.line_of_sight(u, v, direction_index)?;
    let k = field.k_factor(direction_index - 1);
    if k.is_infinite() {
        return Ok(los);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(fading_key(field.rng_seed, u, v, t, direction_index));
    Ok(los + complex_gaussian(&mut rng, los.norm_sqr() / k))
}

pub fn distance(a: Vec3, b: Vec3) -> f64 {
    a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Azimuth of `u` as seen from `v`.
pub fn bearing(u: Vec3, v: Vec3) -> f64 {
    (u[1] - v[1]).atan2(u[0] - v[0])
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn fading_key(seed: u64, u: Vec3, v: Vec3, t: f64, dir: usize) -> u64 {
    let mut h = splitmix(seed);
    for x in u.iter().chain(&v).chain(std::iter::once(&t)) {
        h = splitmix(h ^ x.to_bits());
    }
    splitmix(h ^ dir as u64)
}
