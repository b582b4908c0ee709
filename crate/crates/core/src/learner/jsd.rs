use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Regular 2-D grid over `[x_lo, x_hi] × [y_lo, y_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Binning2D {
    pub nx: usize,
    pub ny: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Binning2D {
    /// Square grid of `bins × bins` spanning `±half_width` on both axes.
    pub fn symmetric(bins: usize, half_width: f64) -> Self {
        Self { nx: bins, ny: bins, x_lo: -half_width, x_hi: half_width, y_lo: -half_width, y_hi: half_width }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn axis(v: f64, lo: f64, hi: f64, n: usize) -> usize {
        let k = ((v - lo) / (hi - lo) * n as f64).floor();
        if k.is_nan() || k < 0.0 {
            0
        } else {
            (k as usize).min(n - 1)
        }
    }

    /// Flat bin index; points outside the range land in the nearest edge bin.
    pub fn bin(&self, p: [f64; 2]) -> usize {
        Self::axis(p[0], self.x_lo, self.x_hi, self.nx) * self.ny + Self::axis(p[1], self.y_lo, self.y_hi, self.ny)
    }
}

/// Normalized histogram over a [`Binning2D`].
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub binning: Binning2D,
    pub probs: Vec<f64>,
}

impl Histogram {
    pub fn from_points(binning: Binning2D, points: &[[f64; 2]]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut probs = vec![0.0; binning.len()];
        for &p in points {
            probs[binning.bin(p)] += 1.0;
        }
        let n = points.len() as f64;
        probs.iter_mut().for_each(|v| *v /= n);
        Ok(Self { binning, probs })
    }

    /// Wrap explicit bin masses; they must sum to 1.
    pub fn from_probs(binning: Binning2D, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != binning.len() {
            return Err(Error::ShapeMismatch(format!("{} masses for {} bins", probs.len(), binning.len())));
        }
        let total: f64 = probs.iter().sum();
        if probs.iter().any(|&p| p < 0.0 || !p.is_finite()) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::ShapeMismatch(format!("bin masses sum to {total}")));
        }
        Ok(Self { binning, probs })
    }
}

fn kl_to_mid(p: &[f64], m: &[f64]) -> f64 {
    p.iter().zip(m).filter(|(a, _)| **a > 0.0).map(|(a, b)| a * (a / b).ln()).sum()
}

/// Jensen-Shannon divergence in nats, within `[0, ln 2]`.
pub fn jsd(p: &Histogram, q: &Histogram) -> Result<f64> {
    if p.binning != q.binning {
        return Err(Error::ShapeMismatch("histograms use different binnings".into()));
    }
    let m: Vec<f64> = p.probs.iter().zip(&q.probs).map(|(a, b)| 0.5 * (a + b)).collect();
    let d = 0.5 * kl_to_mid(&p.probs, &m) + 0.5 * kl_to_mid(&q.probs, &m);
    Ok(d.clamp(0.0, std::f64::consts::LN_2))
}

/// Mean JSD over paired per-condition histograms.
pub fn average_jsd(learned: &[Histogram], truth: &[Histogram]) -> Result<f64> {
    if learned.len() != truth.len() || learned.is_empty() {
        return Err(Error::ShapeMismatch(format!("{} vs {} condition histograms", learned.len(), truth.len())));
    }
    let mut total = 0.0;
    for (p, q) in learned.iter().zip(truth) {
        total += jsd(p, q)?;
    }
    Ok(total / learned.len() as f64)
}

/// Nash-equilibrium test: discriminator near ½ and learned distribution near the truth.
pub fn ne_check(disc_outputs: &[f64], learned: &Histogram, truth: &Histogram, eps_d: f64, eps_jsd: f64) -> Result<bool> {
    if disc_outputs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let dev = disc_outputs.iter().map(|d| (d - 0.5).abs()).sum::<f64>() / disc_outputs.len() as f64;
    Ok(dev < eps_d && jsd(learned, truth)? < eps_jsd)
}
