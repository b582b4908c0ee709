use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::mlp::Mlp;
use super::nets::{CondSample, Discriminator, Generator, Standardizer};
use super::objective::{GenLoss, MixRule, MixWeights, Optimizer, OptimizerKind};
use crate::channel::ChannelSample;
use crate::error::{Error, Result};

/// Learner hyperparameters shared by every node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerConfig {
    pub noise_dim: usize,
    pub gen_hidden: Vec<usize>,
    pub disc_hidden: Vec<usize>,
    pub gen_learning_rate: f64,
    pub disc_learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub gen_loss: GenLoss,
    pub mix_rule: MixRule,
    /// Conditions sampled per training step (`o`).
    pub batch_size: usize,
    /// Discriminator/generator update pairs per round.
    pub local_steps: usize,
    /// Per-step decay of the generator's parameter moving average, used for
    /// sampling; 0 samples from the raw generator.
    pub ema_decay: f64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            noise_dim: 4,
            gen_hidden: vec![32, 32],
            disc_hidden: vec![32, 32],
            gen_learning_rate: 1e-3,
            disc_learning_rate: 4e-3,
            optimizer: OptimizerKind::default(),
            gen_loss: GenLoss::default(),
            mix_rule: MixRule::default(),
            batch_size: 128,
            local_steps: 10,
            ema_decay: 0.995,
        }
    }
}

/// Everything one node owns: networks, optimizers, its standardized data
/// and the frame used to standardize it.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerState {
    pub generator: Generator,
    /// Moving average of the generator parameters, when enabled.
    pub generator_avg: Option<Generator>,
    pub ema_decay: f64,
    pub discriminator: Discriminator,
    pub gen_opt: Optimizer,
    pub disc_opt: Optimizer,
    pub frame: Standardizer,
    pub data: Vec<CondSample>,
    pub mix: MixWeights,
}

impl LearnerState {
    pub fn new<R: Rng + ?Sized>(
        cfg: &LearnerConfig,
        dataset: &[ChannelSample],
        frame: Standardizer,
        rng: &mut R,
    ) -> Result<Self> {
        if dataset.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let dirs = frame.num_directions();
        let generator = Generator::new(cfg.noise_dim, &cfg.gen_hidden, dirs, rng)?;
        let discriminator = Discriminator::new(&cfg.disc_hidden, dirs, rng)?;
        let data = dataset
            .iter()
            .map(|s| CondSample { x: frame.standardize(s.gain_estimate, s.direction_index), cond: s.direction_index })
            .collect();
        Ok(Self {
            gen_opt: Optimizer::new(cfg.optimizer, generator.net.num_params()),
            disc_opt: Optimizer::new(cfg.optimizer, discriminator.net.num_params()),
            generator_avg: (cfg.ema_decay > 0.0).then(|| generator.clone()),
            ema_decay: cfg.ema_decay,
            generator,
            discriminator,
            frame,
            data,
            mix: MixWeights { self_weight: 1.0, neighbor_weights: Default::default() },
        })
    }

    pub fn num_directions(&self) -> usize {
        self.frame.num_directions()
    }

    /// Generator used to draw samples: the moving average when enabled.
    pub fn sampler(&self) -> &Generator {
        self.generator_avg.as_ref().unwrap_or(&self.generator)
    }

    /// Fold the current generator into the moving average.
    pub fn update_average(&mut self) {
        if let Some(avg) = &mut self.generator_avg {
            let d = self.ema_decay;
            for (a, p) in avg.net.params_mut().iter_mut().zip(self.generator.net.params()) {
                *a = d * *a + (1.0 - d) * p;
            }
        }
    }
}

const CHECKPOINT_MAGIC: &str = "fleetgan-checkpoint v1";

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

/// Plain-text dump of both networks and the standardization frame.
pub fn write_checkpoint<W: Write>(state: &LearnerState, mut out: W) -> Result<()> {
    writeln!(out, "{CHECKPOINT_MAGIC}")?;
    writeln!(out, "noise_dim {}", state.generator.noise_dim)?;
    writeln!(out, "directions {}", state.num_directions())?;
    writeln!(out, "generator {}", join(state.generator.net.sizes()))?;
    writeln!(out, "discriminator {}", join(state.discriminator.net.sizes()))?;
    for s in &state.frame.stats {
        writeln!(out, "frame {}", join(s))?;
    }
    writeln!(out, "generator_params {}", join(state.sampler().net.params()))?;
    writeln!(out, "discriminator_params {}", join(state.discriminator.net.params()))?;
    Ok(())
}

/// Networks and frame restored from [`write_checkpoint`] output.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub generator: Generator,
    pub discriminator: Discriminator,
    pub frame: Standardizer,
}

pub fn read_checkpoint<R: BufRead>(input: R) -> Result<Checkpoint> {
    let mut lines = input.lines();
    let magic = lines.next().transpose()?.unwrap_or_default();
    if magic != CHECKPOINT_MAGIC {
        return Err(Error::Parse(format!("not a checkpoint: `{magic}`")));
    }
    let mut fields: Vec<(String, Vec<String>)> = Vec::new();
    for line in lines {
        let line = line?;
        let mut parts = line.split_whitespace().map(str::to_owned);
        if let Some(key) = parts.next() {
            fields.push((key, parts.collect()));
        }
    }
    let get = |key: &str| -> Result<&Vec<String>> {
        fields.iter().find(|(k, _)| k == key).map(|(_, v)| v).ok_or_else(|| Error::Parse(format!("missing `{key}`")))
    };
    fn nums<T: std::str::FromStr>(v: &[String]) -> Result<Vec<T>> {
        v.iter().map(|s| s.parse::<T>().map_err(|_| Error::Parse(format!("bad number `{s}`")))).collect()
    }
    let noise_dim = nums::<usize>(get("noise_dim")?)?.first().copied().ok_or_else(|| Error::Parse("noise_dim".into()))?;
    let dirs = nums::<usize>(get("directions")?)?.first().copied().ok_or_else(|| Error::Parse("directions".into()))?;
    let gen_net = Mlp::from_params(&nums::<usize>(get("generator")?)?, nums(get("generator_params")?)?)?;
    let disc_net = Mlp::from_params(&nums::<usize>(get("discriminator")?)?, nums(get("discriminator_params")?)?)?;
    let stats = fields
        .iter()
        .filter(|(k, _)| k == "frame")
        .map(|(_, v)| {
            let n = nums::<f64>(v)?;
            <[f64; 4]>::try_from(n).map_err(|_| Error::Parse("frame row needs 4 numbers".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    if stats.len() != dirs || gen_net.input_dim() != noise_dim + dirs || disc_net.input_dim() != 2 + dirs {
        return Err(Error::ShapeMismatch("checkpoint header disagrees with its networks".into()));
    }
    Ok(Checkpoint {
        generator: Generator { net: gen_net, noise_dim, num_directions: dirs },
        discriminator: Discriminator { net: disc_net, num_directions: dirs },
        frame: Standardizer { stats },
    })
}
