use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::nets::{log_sigmoid, logit_bound, sigmoid, CondSample, Discriminator, Generator};
use crate::error::{Error, Result};

/// How a neighbor's weight in the discriminator's "real" mixture is sized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MixRule {
    /// `π_gj ∝ η·H_g`, the receiver's own size.
    #[default]
    OwnSize,
    /// `π_gj ∝ η·H_j`, the sender's size.
    SenderSize,
}

/// Convex weights over the node's own data and each neighbor's shared samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixWeights {
    pub self_weight: f64,
    pub neighbor_weights: BTreeMap<usize, f64>,
}

/// `π_g = H_g/(H_g + ηΣH_j)` and the neighbor weights, normalized to sum to 1.
pub fn mix_weights(own_size: usize, neighbor_sizes: &BTreeMap<usize, usize>, eta: f64, rule: MixRule) -> Result<MixWeights> {
    if own_size == 0 {
        return Err(Error::EmptyDataset);
    }
    let h_g = own_size as f64;
    let denom = h_g + eta * neighbor_sizes.values().map(|&h| h as f64).sum::<f64>();
    let raw: BTreeMap<usize, f64> = neighbor_sizes
        .iter()
        .map(|(&j, &h_j)| {
            let size = match rule {
                MixRule::OwnSize => h_g,
                MixRule::SenderSize => h_j as f64,
            };
            (j, eta * size / denom)
        })
        .collect();
    let self_raw = h_g / denom;
    let total = self_raw + raw.values().sum::<f64>();
    Ok(MixWeights {
        self_weight: self_raw / total,
        neighbor_weights: raw.into_iter().map(|(j, w)| (j, w / total)).collect(),
    })
}

/// Split `total` draws across `weights` by largest remainder (ties to the lower index).
pub fn mixture_counts(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 || weights.is_empty() {
        return vec![0; weights.len()];
    }
    let exact: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let missing = total - counts.iter().sum::<usize>();
    for &k in order.iter().take(missing) {
        counts[k] += 1;
    }
    counts
}

fn group_mean(samples: impl Iterator<Item = (usize, f64)>) -> BTreeMap<usize, f64> {
    let mut acc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for (c, v) in samples {
        let e = acc.entry(c).or_default();
        e.0 += v;
        e.1 += 1;
    }
    acc.into_iter().map(|(c, (s, n))| (c, s / n as f64)).collect()
}

fn fake_terms(disc: &Discriminator, gen: &Generator, noise: &[Vec<f64>], conds: &[usize]) -> BTreeMap<usize, f64> {
    group_mean(noise.iter().zip(conds).map(|(z, &c)| (c, log_sigmoid(-disc.logit(gen.generate(z, c), c)))))
}

/// `(1/I)Σ_φ [mean log D(h|φ) + mean log(1 − D(G(z|φ)))]` over conditions
/// present in both the real and the generated batch.
pub fn value_function(disc: &Discriminator, gen: &Generator, real: &[CondSample], noise: &[Vec<f64>], conds: &[usize]) -> f64 {
    mixed_value_function(disc, gen, &[(1.0, real)], noise, conds)
}

/// Value function whose real expectation runs over a weighted mixture of
/// batches (own data and each neighbor's shared samples).
pub fn mixed_value_function(
    disc: &Discriminator,
    gen: &Generator,
    components: &[(f64, &[CondSample])],
    noise: &[Vec<f64>],
    conds: &[usize],
) -> f64 {
    let fake = fake_terms(disc, gen, noise, conds);
    let per_component: Vec<(f64, BTreeMap<usize, f64>)> = components
        .iter()
        .map(|(w, batch)| (*w, group_mean(batch.iter().map(|s| (s.cond, log_sigmoid(disc.logit(s.x, s.cond)))))))
        .collect();
    let mut total = 0.0;
    let mut count = 0;
    for (c, f) in fake {
        let (mut num, mut den) = (0.0, 0.0);
        for (w, means) in &per_component {
            if let Some(m) = means.get(&c) {
                num += w * m;
                den += w;
            }
        }
        if den > 0.0 {
            total += num / den + f;
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        total / count as f64
    }
}

/// Gradient-carrying logit: zero slope outside the clamp.
fn clamped(z: f64) -> (f64, f64) {
    let b = logit_bound();
    if z.abs() > b {
        (z.clamp(-b, b), 0.0)
    } else {
        (z, 1.0)
    }
}

/// `½[mean log D(pos) + mean log(1 − D(neg))]`, the discriminator's ascent objective.
pub fn disc_objective(disc: &Discriminator, pos: &[CondSample], neg: &[CondSample]) -> f64 {
    disc_objective_and_grad(disc, pos, neg, false).0
}

/// Objective and its parameter gradient.
pub fn disc_gradient(disc: &Discriminator, pos: &[CondSample], neg: &[CondSample]) -> (f64, Vec<f64>) {
    disc_objective_and_grad(disc, pos, neg, true)
}

fn disc_objective_and_grad(disc: &Discriminator, pos: &[CondSample], neg: &[CondSample], want_grad: bool) -> (f64, Vec<f64>) {
    let mut grad = vec![0.0; if want_grad { disc.net.num_params() } else { 0 }];
    let mut value = 0.0;
    for (batch, label) in [(pos, true), (neg, false)] {
        if batch.is_empty() {
            continue;
        }
        let scale = 0.5 / batch.len() as f64;
        for s in batch {
            let trace = disc.net.trace(&disc.input(s.x, s.cond));
            let (z, slope) = clamped(trace.output()[0]);
            let sign = if label { 1.0 } else { -1.0 };
            value += scale * log_sigmoid(sign * z);
            if want_grad && slope != 0.0 {
                // d/dz log σ(±z) = ±(1 − σ(±z))
                let dz = scale * sign * (1.0 - sigmoid(sign * z));
                disc.net.backward(&trace, &[dz], &mut grad);
            }
        }
    }
    (value, grad)
}

/// Generator objective to minimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GenLoss {
    /// `−mean log D(G(z))`.
    #[default]
    NonSaturating,
    /// `mean log(1 − D(G(z)))`.
    Minimax,
}

pub fn gen_loss(gen: &Generator, disc: &Discriminator, noise: &[Vec<f64>], conds: &[usize], loss: GenLoss) -> f64 {
    gen_loss_and_grad(gen, disc, noise, conds, loss, false).0
}

pub fn gen_gradient(gen: &Generator, disc: &Discriminator, noise: &[Vec<f64>], conds: &[usize], loss: GenLoss) -> (f64, Vec<f64>) {
    gen_loss_and_grad(gen, disc, noise, conds, loss, true)
}

fn gen_loss_and_grad(
    gen: &Generator,
    disc: &Discriminator,
    noise: &[Vec<f64>],
    conds: &[usize],
    loss: GenLoss,
    want_grad: bool,
) -> (f64, Vec<f64>) {
    let mut grad = vec![0.0; if want_grad { gen.net.num_params() } else { 0 }];
    let mut scratch = vec![0.0; if want_grad { disc.net.num_params() } else { 0 }];
    if noise.is_empty() {
        return (0.0, grad);
    }
    let scale = 1.0 / noise.len() as f64;
    let mut value = 0.0;
    for (z, &c) in noise.iter().zip(conds) {
        let g_trace = gen.net.trace(&gen.input(z, c));
        let x = [g_trace.output()[0], g_trace.output()[1]];
        let d_trace = disc.net.trace(&disc.input(x, c));
        let (logit, slope) = clamped(d_trace.output()[0]);
        let (v, dv) = match loss {
            GenLoss::NonSaturating => (-log_sigmoid(logit), -(1.0 - sigmoid(logit))),
            GenLoss::Minimax => (log_sigmoid(-logit), -sigmoid(logit)),
        };
        value += scale * v;
        if want_grad && slope != 0.0 {
            let dx = disc.net.backward(&d_trace, &[scale * dv], &mut scratch);
            gen.net.backward(&g_trace, &dx[..2], &mut grad);
        }
    }
    (value, grad)
}

/// Parameter update rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OptimizerKind {
    /// Heavy-ball SGD.
    Sgd { momentum: f64 },
    /// Adam with the usual bias correction.
    Adam { beta1: f64, beta2: f64 },
}

impl Default for OptimizerKind {
    fn default() -> Self {
        OptimizerKind::Adam { beta1: 0.5, beta2: 0.999 }
    }
}

/// Optimizer state for one parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimizer {
    pub kind: OptimizerKind,
    first: Vec<f64>,
    second: Vec<f64>,
    steps: u64,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, num_params: usize) -> Self {
        let second = match kind {
            OptimizerKind::Adam { .. } => vec![0.0; num_params],
            OptimizerKind::Sgd { .. } => Vec::new(),
        };
        Self { kind, first: vec![0.0; num_params], second, steps: 0 }
    }

    /// Move `params` along `grad` (ascent) or against it (descent).
    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64, ascend: bool) {
        let sign = if ascend { 1.0 } else { -1.0 };
        self.steps += 1;
        match self.kind {
            OptimizerKind::Sgd { momentum } => {
                for ((p, v), g) in params.iter_mut().zip(&mut self.first).zip(grad) {
                    *v = momentum * *v + g;
                    *p += sign * lr * *v;
                }
            }
            OptimizerKind::Adam { beta1, beta2 } => {
                let t = self.steps as i32;
                let (c1, c2) = (1.0 - beta1.powi(t), 1.0 - beta2.powi(t));
                for (((p, m), v), g) in params.iter_mut().zip(&mut self.first).zip(&mut self.second).zip(grad) {
                    *m = beta1 * *m + (1.0 - beta1) * g;
                    *v = beta2 * *v + (1.0 - beta2) * g * g;
                    *p += sign * lr * (*m / c1) / ((*v / c2).sqrt() + 1e-8);
                }
            }
        }
    }
}

fn check_finite(grad: &[f64], what: &str) -> Result<()> {
    if grad.iter().all(|g| g.is_finite()) {
        Ok(())
    } else {
        Err(Error::NumericalDivergence(what.into()))
    }
}

/// One ascent step on the discriminator objective; `pos` holds own real and
/// neighbor-shared samples, `neg` the generated ones. Returns the objective
/// before the step.
pub fn train_step_disc(
    disc: &mut Discriminator,
    opt: &mut Optimizer,
    pos: &[CondSample],
    neg: &[CondSample],
    learning_rate: f64,
) -> Result<f64> {
    let (value, grad) = disc_gradient(disc, pos, neg);
    check_finite(&grad, "discriminator")?;
    opt.step(disc.net.params_mut(), &grad, learning_rate, true);
    Ok(value)
}

/// One descent step on the generator loss against a frozen discriminator.
pub fn train_step_gen(
    gen: &mut Generator,
    disc: &Discriminator,
    opt: &mut Optimizer,
    noise: &[Vec<f64>],
    conds: &[usize],
    loss: GenLoss,
    learning_rate: f64,
) -> Result<f64> {
    let (value, grad) = gen_gradient(gen, disc, noise, conds, loss);
    check_finite(&grad, "generator")?;
    opt.step(gen.net.params_mut(), &grad, learning_rate, false);
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mix_weight_examples() {
        let one: BTreeMap<usize, usize> = [(1, 10_000)].into();
        let w = mix_weights(10_000, &one, 0.5, MixRule::OwnSize).unwrap();
        assert!((w.self_weight - 2.0 / 3.0).abs() < 1e-15);
        assert!((w.neighbor_weights[&1] - 1.0 / 3.0).abs() < 1e-15);

        let w = mix_weights(10_000, &BTreeMap::new(), 0.5, MixRule::OwnSize).unwrap();
        assert_eq!(w.self_weight, 1.0);

        let two: BTreeMap<usize, usize> = [(1, 10_000), (2, 10_000)].into();
        let w = mix_weights(10_000, &two, 0.5, MixRule::OwnSize).unwrap();
        assert!((w.self_weight - 0.5).abs() < 1e-15);
        assert!(w.neighbor_weights.values().all(|&x| (x - 0.25).abs() < 1e-15));

        assert!(matches!(mix_weights(0, &one, 0.5, MixRule::OwnSize), Err(Error::EmptyDataset)));
    }

    #[test]
    fn largest_remainder_counts() {
        assert_eq!(mixture_counts(&[2.0 / 3.0, 1.0 / 3.0], 64), vec![43, 21]);
        assert_eq!(mixture_counts(&[0.5, 0.25, 0.25], 3), vec![1, 1, 1]);
        assert_eq!(mixture_counts(&[1.0, 0.0], 5), vec![5, 0]);
    }
}
