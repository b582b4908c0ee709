use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::mlp::Mlp;
use crate::channel::ChannelSample;
use crate::error::{Error, Result};

/// Probability floor used when taking logs of discriminator outputs.
pub const LOG_EPS: f64 = 1e-7;

/// Largest logit magnitude, `ln((1 − ε)/ε)`; keeps `D` inside `[ε, 1 − ε]`.
pub fn logit_bound() -> f64 {
    ((1.0 - LOG_EPS) / LOG_EPS).ln()
}

/// Codebook direction used as the conditioning label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Condition {
    index: usize,
    num_directions: usize,
}

impl Condition {
    pub fn new(index: usize, num_directions: usize) -> Result<Self> {
        if index == 0 || index > num_directions {
            return Err(Error::DirectionOutOfRange { index, max: num_directions });
        }
        Ok(Self { index, num_directions })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn encoding(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.num_directions];
        v[self.index - 1] = 1.0;
        v
    }
}

/// A standardized `(Re, Im)` point tagged with its direction (1-based).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondSample {
    pub x: [f64; 2],
    pub cond: usize,
}

/// Per-direction affine frame mapping raw gains to O(1) features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    /// `[mean_re, std_re, mean_im, std_im]` per direction.
    pub stats: Vec<[f64; 4]>,
}

impl Standardizer {
    pub fn identity(num_directions: usize) -> Self {
        Self { stats: vec![[0.0, 1.0, 0.0, 1.0]; num_directions] }
    }

    /// Fit means and standard deviations per direction over the given gains.
    pub fn fit<'a>(gains: impl IntoIterator<Item = (Complex64, usize)>, num_directions: usize) -> Result<Self> {
        let mut acc = vec![[0.0f64; 5]; num_directions];
        for (g, dir) in gains {
            if dir == 0 || dir > num_directions {
                return Err(Error::DirectionOutOfRange { index: dir, max: num_directions });
            }
            let a = &mut acc[dir - 1];
            a[0] += 1.0;
            a[1] += g.re;
            a[2] += g.re * g.re;
            a[3] += g.im;
            a[4] += g.im * g.im;
        }
        let stats = acc
            .iter()
            .map(|a| {
                if a[0] == 0.0 {
                    return [0.0, 1.0, 0.0, 1.0];
                }
                let n = a[0];
                let (mr, mi) = (a[1] / n, a[3] / n);
                let sd = |sq: f64, m: f64| {
                    let v = (sq / n - m * m).max(0.0).sqrt();
                    if v > 0.0 {
                        v
                    } else {
                        1.0
                    }
                };
                [mr, sd(a[2], mr), mi, sd(a[4], mi)]
            })
            .collect();
        Ok(Self { stats })
    }

    pub fn fit_dataset(samples: &[ChannelSample], num_directions: usize) -> Result<Self> {
        Self::fit(samples.iter().map(|s| (s.gain_estimate, s.direction_index)), num_directions)
    }

    pub fn num_directions(&self) -> usize {
        self.stats.len()
    }

    pub fn standardize(&self, gain: Complex64, dir: usize) -> [f64; 2] {
        let s = &self.stats[dir - 1];
        [(gain.re - s[0]) / s[1], (gain.im - s[2]) / s[3]]
    }

    pub fn destandardize(&self, x: [f64; 2], dir: usize) -> Complex64 {
        let s = &self.stats[dir - 1];
        Complex64::new(x[0] * s[1] + s[0], x[1] * s[3] + s[2])
    }
}

/// Conditional generator: `(noise, one-hot direction) → standardized (Re, Im)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub net: Mlp,
    pub noise_dim: usize,
    pub num_directions: usize,
}

impl Generator {
    pub fn new<R: Rng + ?Sized>(noise_dim: usize, hidden: &[usize], num_directions: usize, rng: &mut R) -> Result<Self> {
        let mut sizes = vec![noise_dim + num_directions];
        sizes.extend_from_slice(hidden);
        sizes.push(2);
        Ok(Self { net: Mlp::new(&sizes, rng)?, noise_dim, num_directions })
    }

    pub fn input(&self, noise: &[f64], cond: usize) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.noise_dim + self.num_directions);
        x.extend_from_slice(noise);
        x.extend((1..=self.num_directions).map(|d| if d == cond { 1.0 } else { 0.0 }));
        x
    }

    pub fn generate(&self, noise: &[f64], cond: usize) -> [f64; 2] {
        let y = self.net.forward(&self.input(noise, cond));
        [y[0], y[1]]
    }

    pub fn sample_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.noise_dim).map(|_| rng.sample(StandardNormal)).collect()
    }
}

/// Conditional discriminator: `(standardized (Re, Im), one-hot direction) → logit`.
#[derive(Debug, Clone, PartialEq)]
pub struct Discriminator {
    pub net: Mlp,
    pub num_directions: usize,
}

impl Discriminator {
    pub fn new<R: Rng + ?Sized>(hidden: &[usize], num_directions: usize, rng: &mut R) -> Result<Self> {
        let mut sizes = vec![2 + num_directions];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        Ok(Self { net: Mlp::new(&sizes, rng)?, num_directions })
    }

    pub fn input(&self, x: [f64; 2], cond: usize) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 + self.num_directions);
        v.extend_from_slice(&x);
        v.extend((1..=self.num_directions).map(|d| if d == cond { 1.0 } else { 0.0 }));
        v
    }

    /// Clamped logit.
    pub fn logit(&self, x: [f64; 2], cond: usize) -> f64 {
        let b = logit_bound();
        self.net.forward(&self.input(x, cond))[0].clamp(-b, b)
    }

    /// `D(x | φ)`, strictly inside `(0, 1)`.
    pub fn prob(&self, x: [f64; 2], cond: usize) -> f64 {
        sigmoid(self.logit(x, cond))
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln σ(z)` without overflow.
pub fn log_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}
