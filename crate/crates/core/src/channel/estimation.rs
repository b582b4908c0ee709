//! Single-path MIMO channel, pilot reception and the per-beam gain estimator.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::steering::{inner, steering_vector, CodebookEntry, SteeringVector};
use crate::error::{Error, Result};

/// Estimator denominators smaller than this are rejected.
pub const MIN_BEAM_NORMALIZATION: f64 = 1e-12;

/// Rank-one channel `H = A beta_p(aoa) beta_q(aod)^H` of shape `K x L`.
///
/// Stored in factored form; [`ChannelMatrix::entries`] materializes it.
#[derive(Debug, Clone)]
pub struct ChannelMatrix {
    gain: Complex64,
    tx: SteeringVector,
    rx: SteeringVector,
}

impl ChannelMatrix {
    pub fn single_path(gain: Complex64, aod: f64, aoa: f64, tx_antennas: usize, rx_antennas: usize) -> Result<Self> {
        Ok(Self {
            gain,
            tx: steering_vector(aod, tx_antennas)?,
            rx: steering_vector(aoa, rx_antennas)?,
        })
    }

    /// Channel aligned with a codebook direction, reusing its array responses.
    pub fn along(entry: &CodebookEntry, gain: Complex64) -> Self {
        Self { gain, tx: entry.tx_response().clone(), rx: entry.rx_response().clone() }
    }

    pub fn gain(&self) -> Complex64 {
        self.gain
    }

    pub fn aod(&self) -> f64 {
        self.tx.angle()
    }

    pub fn aoa(&self) -> f64 {
        self.rx.angle()
    }

    pub fn tx_antennas(&self) -> usize {
        self.tx.len()
    }

    pub fn rx_antennas(&self) -> usize {
        self.rx.len()
    }

    /// Dense `K x L` matrix, row-major (row = receive element).
    pub fn entries(&self) -> Vec<Vec<Complex64>> {
        self.rx
            .entries()
            .iter()
            .map(|r| self.tx.entries().iter().map(|t| self.gain * r * t.conj()).collect())
            .collect()
    }

    /// `f^H H e` evaluated through the rank-one factors.
    pub fn bilinear(&self, combiner: &[Complex64], beamformer: &[Complex64]) -> Result<Complex64> {
        self.check_dims(combiner, beamformer)?;
        Ok(self.gain * inner(combiner, self.rx.entries()) * inner(self.tx.entries(), beamformer))
    }

    fn check_dims(&self, combiner: &[Complex64], beamformer: &[Complex64]) -> Result<()> {
        if beamformer.len() != self.tx.len() || combiner.len() != self.rx.len() {
            return Err(Error::ShapeMismatch(format!(
                "beam pair ({}, {}) against channel {}x{}",
                beamformer.len(),
                combiner.len(),
                self.rx.len(),
                self.tx.len()
            )));
        }
        Ok(())
    }
}

/// Draw one circularly-symmetric complex Gaussian with `E|z|^2 = variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Received pilot `sqrt(P) f^H H e + f^H N`, with `N ~ CN(0, noise_power I_K)`.
pub fn received_pilot<R: Rng + ?Sized>(
    beamformer: &[Complex64],
    combiner: &[Complex64],
    channel: &ChannelMatrix,
    pilot_power: f64,
    noise_power: f64,
    rng: &mut R,
) -> Result<Complex64> {
    if pilot_power <= 0.0 {
        return Err(Error::ShapeMismatch(format!("pilot power must be positive, got {pilot_power}")));
    }
    let signal = channel.bilinear(combiner, beamformer)? * pilot_power.sqrt();
    if noise_power <= 0.0 {
        return Ok(signal);
    }
    let noise: Complex64 = combiner.iter().map(|f| f.conj() * complex_gaussian(rng, noise_power)).sum();
    Ok(signal + noise)
}

/// Recover the path gain by dividing out `sqrt(P) f^H beta_p(aoa_i) beta_q(aod_i)^H e`.
pub fn estimate_gain(
    pilot_symbol: Complex64,
    beamformer: &[Complex64],
    combiner: &[Complex64],
    entry: &CodebookEntry,
    pilot_power: f64,
) -> Result<Complex64> {
    if pilot_power <= 0.0 {
        return Err(Error::ShapeMismatch(format!("pilot power must be positive, got {pilot_power}")));
    }
    if beamformer.len() != entry.tx_response().len() || combiner.len() != entry.rx_response().len() {
        return Err(Error::ShapeMismatch("beam pair does not match codebook entry".into()));
    }
    let denom = pilot_power.sqrt()
        * inner(combiner, entry.rx_response().entries())
        * inner(entry.tx_response().entries(), beamformer);
    if denom.norm() < MIN_BEAM_NORMALIZATION {
        return Err(Error::IllConditionedBeamPair { magnitude: denom.norm() });
    }
    Ok(pilot_symbol / denom)
}
