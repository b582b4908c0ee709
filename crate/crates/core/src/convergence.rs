//! Closed-form convergence analytics for sample sharing over a graph:
//! per-iteration arrival probability, cumulative convergence probability,
//! iterations to a target, convergence time and communication load.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{max_shortest_path, min_loops, NetworkGraph};

/// Acceleration coefficient applied once a shortest loop has closed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GammaSchedule {
    /// `γ ≡ 1`, the conservative lower bound.
    #[default]
    Unit,
    /// `γ(k) = min(1 + slope·(k − k₀), cap)` past the boundary `k₀`, else 1.
    Linear { slope: f64, cap: f64 },
}

impl GammaSchedule {
    /// `γ(k)` given the boundary iteration `k0` where `γ(k0) = 1`.
    pub fn value(&self, k: u32, k0: u32) -> f64 {
        match *self {
            GammaSchedule::Unit => 1.0,
            GammaSchedule::Linear { slope, cap } => {
                if k <= k0 {
                    1.0
                } else {
                    (1.0 + slope * f64::from(k - k0)).min(cap).max(1.0)
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let GammaSchedule::Linear { slope, cap } = *self {
            if !(slope >= 0.0 && slope.is_finite()) {
                return Err(invalid("convergence.gamma.slope", format!("{slope} must be finite and >= 0")));
            }
            if !(cap >= 1.0) {
                return Err(invalid("convergence.gamma.cap", format!("{cap} must be >= 1")));
            }
        }
        Ok(())
    }
}

/// Inputs of the convergence-probability formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceParams {
    pub l_max: u32,
    pub l_loop_min: u32,
    pub eta: f64,
    /// Dilution in-degree `C`.
    pub in_degree: u32,
    pub training_error: f64,
    pub gamma: GammaSchedule,
    pub target_probability: f64,
    /// Largest iteration `iterations_for_target` will inspect.
    pub iteration_cap: u32,
}

fn invalid(path: &str, message: String) -> Error {
    Error::ConfigInvalid { path: path.into(), message }
}

impl ConvergenceParams {
    /// Read `l_max`, the smallest loop and the largest in-degree off a graph.
    pub fn from_graph(
        graph: &NetworkGraph,
        eta: f64,
        training_error: f64,
        gamma: GammaSchedule,
        target_probability: f64,
        iteration_cap: u32,
    ) -> Result<Self> {
        let l_max = max_shortest_path(graph)? as u32;
        let l_loop_min = min_loops(graph)?.into_iter().min().unwrap_or(0) as u32;
        let params = Self {
            l_max,
            l_loop_min,
            eta,
            in_degree: graph.max_in_degree() as u32,
            training_error,
            gamma,
            target_probability,
            iteration_cap,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(invalid("convergence.eta", format!("{} outside (0, 1]", self.eta)));
        }
        if !(0.0..=1.0).contains(&self.training_error) {
            return Err(invalid("convergence.training_error", format!("{} outside [0, 1]", self.training_error)));
        }
        if !(0.0..=1.0).contains(&self.target_probability) {
            return Err(invalid("convergence.target_probability", format!("{} outside [0, 1]", self.target_probability)));
        }
        self.gamma.validate()
    }

    /// Iteration `ℓ_max + ℓ_loop − 1` at which `γ` is pinned to 1.
    pub fn gamma_boundary(&self) -> u32 {
        (self.l_max + self.l_loop_min).saturating_sub(1)
    }

    fn base(&self) -> f64 {
        ((1.0 - self.training_error) * self.eta).powi(self.l_max as i32)
    }

    fn dilution(&self) -> f64 {
        1.0 + f64::from(self.in_degree) * self.eta
    }
}

/// `P^in(I)`: probability that a sample reaches the farthest node at exactly
/// iteration `I`, assuming independent per-hop survival `(1 − T)η` and
/// per-round dilution `1/(1 + Cη)`.
pub fn single_hop_arrival_prob(params: &ConvergenceParams, iteration: u32) -> f64 {
    if iteration == 0 || iteration < params.l_max {
        return 0.0;
    }
    let k0 = params.gamma_boundary();
    let boost: f64 = (k0 + 1..=iteration).map(|k| params.gamma.value(k, k0)).product();
    (params.base() / params.dilution().powi(iteration as i32 - 1) * boost).clamp(0.0, 1.0)
}

/// `P(I) = P(I − 1) + (1 − P(I − 1))·P^in(I)` with `P(0) = 0`.
pub fn cumulative_convergence_prob(params: &ConvergenceParams, iteration: u32) -> f64 {
    convergence_curve(params, iteration).last().copied().unwrap_or(0.0)
}

/// `P(0), P(1), …, P(max_iteration)` in one pass.
pub fn convergence_curve(params: &ConvergenceParams, max_iteration: u32) -> Vec<f64> {
    let k0 = params.gamma_boundary();
    let base = params.base();
    let dilution = params.dilution();
    let mut out = Vec::with_capacity(max_iteration as usize + 1);
    out.push(0.0);
    let mut p = 0.0;
    let mut decay = 1.0;
    let mut boost = 1.0;
    for i in 1..=max_iteration {
        if i > 1 {
            decay /= dilution;
        }
        if i > k0 {
            boost *= params.gamma.value(i, k0);
        }
        if i >= params.l_max {
            let arrival = (base * decay * boost).clamp(0.0, 1.0);
            p += (1.0 - p) * arrival;
        }
        out.push(p.clamp(0.0, 1.0));
    }
    out
}

/// Smallest `I` with `P(I) ≥ target`; a zero target returns `ℓ_max`.
pub fn iterations_for_target(params: &ConvergenceParams) -> Result<u32> {
    let cap = params.iteration_cap;
    let curve = convergence_curve(params, cap);
    let first = params.l_max.max(1);
    (first..=cap)
        .find(|&i| curve[i as usize] >= params.target_probability)
        .ok_or(Error::TargetUnreachable { target: params.target_probability, cap })
}

/// How the generator and discriminator iteration counts combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TimeCombine {
    /// `(t_Th + t_fx)·I_G·I_D`, the formula as written.
    #[default]
    Product,
    /// `(t_Th + t_fx)·max(I_G, I_D)`.
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingParams {
    pub share_slot: f64,
    pub local_train_time: f64,
    pub iterations_gen: u32,
    pub iterations_disc: u32,
}

/// Seconds until convergence.
pub fn convergence_time(timing: &TimingParams, combine: TimeCombine) -> f64 {
    let per = timing.share_slot + timing.local_train_time;
    let (g, d) = (f64::from(timing.iterations_gen), f64::from(timing.iterations_disc));
    match combine {
        TimeCombine::Product => per * g * d,
        TimeCombine::Max => per * g.max(d),
    }
}

/// `I · Σ_g η·H_g·ρ·Q_g`, in sample-payload units.
pub fn communication_load(iterations: u64, eta: f64, dataset_sizes: &[usize], rho: f64, out_degrees: &[usize]) -> f64 {
    let per_round: f64 = dataset_sizes
        .iter()
        .zip(out_degrees)
        .map(|(&h, &q)| eta * h as f64 * rho * q as f64)
        .sum();
    iterations as f64 * per_round
}

/// Samples one node generates for each neighbor per round, `⌈η·H_g⌉`.
pub fn share_quota(eta: f64, dataset_size: usize) -> usize {
    (eta * dataset_size as f64).ceil() as usize
}
