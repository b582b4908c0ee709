use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Array response of a half-wavelength uniform linear array.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    angle: f64,
    entries: Vec<Complex64>,
}

impl SteeringVector {
    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries scaled by `1/sqrt(n)` so the vector has unit norm.
    pub fn normalized(&self) -> Vec<Complex64> {
        let scale = 1.0 / (self.entries.len() as f64).sqrt();
        self.entries.iter().map(|z| z * scale).collect()
    }
}

/// `entries[k] = exp(i k pi sin(angle))` for `k = 0..num_elements`.
///
/// The angle is wrapped into `[0, 2pi)`.
pub fn steering_vector(angle: f64, num_elements: usize) -> Result<SteeringVector> {
    if num_elements == 0 {
        return Err(Error::InvalidAntennaCount);
    }
    let angle = angle.rem_euclid(TAU);
    let phase_step = PI * angle.sin();
    let entries = (0..num_elements)
        .map(|k| {
            if k == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::from_polar(1.0, k as f64 * phase_step)
            }
        })
        .collect();
    Ok(SteeringVector { angle, entries })
}

/// Hermitian inner product `a^H b`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// One beamforming/combining pair of the codebook.
#[derive(Debug, Clone)]
pub struct CodebookEntry {
    /// 1-based direction index.
    pub index: usize,
    pub aod: f64,
    pub aoa: f64,
    /// Unit-norm transmit beamformer, `L` entries.
    pub beamformer: Vec<Complex64>,
    /// Unit-norm receive combiner, `K` entries.
    pub combiner: Vec<Complex64>,
    tx_response: SteeringVector,
    rx_response: SteeringVector,
}

impl CodebookEntry {
    pub fn new(index: usize, aod: f64, aoa: f64, tx_antennas: usize, rx_antennas: usize) -> Result<Self> {
        let tx_response = steering_vector(aod, tx_antennas)?;
        let rx_response = steering_vector(aoa, rx_antennas)?;
        Ok(Self {
            index,
            aod: tx_response.angle(),
            aoa: rx_response.angle(),
            beamformer: tx_response.normalized(),
            combiner: rx_response.normalized(),
            tx_response,
            rx_response,
        })
    }

    /// Transmit array response `beta_q(aod)`.
    pub fn tx_response(&self) -> &SteeringVector {
        &self.tx_response
    }

    /// Receive array response `beta_p(aoa)`.
    pub fn rx_response(&self) -> &SteeringVector {
        &self.rx_response
    }
}

/// The `I` beam pairs shared by every UAV and the ground station.
#[derive(Debug, Clone)]
pub struct Codebook {
    entries: Vec<CodebookEntry>,
    tx_antennas: usize,
    rx_antennas: usize,
}

impl Codebook {
    /// Uniform direction grid `2 pi (i - 1) / I` for both departure and arrival.
    pub fn uniform(directions: usize, tx_antennas: usize, rx_antennas: usize) -> Result<Self> {
        let angles: Vec<(f64, f64)> = (0..directions)
            .map(|i| {
                let a = TAU * i as f64 / directions as f64;
                (a, a)
            })
            .collect();
        Self::from_angles(&angles, tx_antennas, rx_antennas)
    }

    /// Codebook from explicit `(aod, aoa)` pairs.
    pub fn from_angles(angles: &[(f64, f64)], tx_antennas: usize, rx_antennas: usize) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::ShapeMismatch("codebook needs at least one direction".into()));
        }
        let entries = angles
            .iter()
            .enumerate()
            .map(|(i, &(aod, aoa))| CodebookEntry::new(i + 1, aod, aoa, tx_antennas, rx_antennas))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { entries, tx_antennas, rx_antennas })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn tx_antennas(&self) -> usize {
        self.tx_antennas
    }

    pub fn rx_antennas(&self) -> usize {
        self.rx_antennas
    }

    pub fn entries(&self) -> &[CodebookEntry] {
        &self.entries
    }

    /// Entry for a 1-based direction index.
    pub fn entry(&self, direction_index: usize) -> Result<&CodebookEntry> {
        if direction_index == 0 || direction_index > self.entries.len() {
            return Err(Error::DirectionOutOfRange { index: direction_index, max: self.entries.len() });
        }
        Ok(&self.entries[direction_index - 1])
    }

    pub fn departure_angles(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.aod).collect()
    }
}
