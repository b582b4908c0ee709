use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::channel::ChannelSample;
use crate::config::derive_seed;
use crate::convergence::share_quota;
use crate::error::{Error, Result};
use crate::learner::{
    average_jsd, mix_weights, mixed_value_function, mixture_counts, train_step_disc, train_step_gen, Binning2D, CondSample,
    Histogram, LearnerConfig, LearnerState, Standardizer,
};
use crate::topology::NetworkGraph;

/// A generated gain published to a neighbor: raw gain and direction only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharedSample {
    pub gain: Complex64,
    pub direction_index: usize,
}

/// Immutable batch one sender published in the previous round.
#[derive(Debug, Clone)]
pub struct SharedBatch {
    pub sender: usize,
    pub samples: Arc<Vec<SharedSample>>,
}

/// Knobs of the round protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub eta: f64,
    pub rho: f64,
    pub learner: LearnerConfig,
    pub share_slot_s: f64,
    pub local_train_time_s: f64,
    pub eps_d: f64,
    pub eps_jsd: f64,
    /// Give every node the same initial parameters.
    pub shared_init: bool,
}

/// Per-node metrics of one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub node: usize,
    pub jsd: Option<f64>,
    pub value: f64,
    pub disc_mean: f64,
    /// Cumulative shared samples times `ρ`.
    pub load_cum: f64,
}

/// One node's learner and private random stream.
#[derive(Debug, Clone)]
pub struct NodeRuntime {
    pub learner: LearnerState,
    pub dataset_size: usize,
    rng: ChaCha8Rng,
}

/// Everything that evolves across rounds.
#[derive(Debug, Clone)]
pub struct SimulationState {
    pub round: usize,
    pub nodes: Vec<NodeRuntime>,
    /// Batches each node received last round, sorted by sender.
    pub inboxes: Vec<Vec<SharedBatch>>,
    pub records: Vec<RoundRecord>,
    /// Cumulative count of shared samples over all edges.
    pub shared_samples: u64,
    pub virtual_time_s: f64,
    pub seed: u64,
}

impl SimulationState {
    /// Fresh learners for each dataset, each standardizing in `frames[g]`.
    pub fn new(
        datasets: &[Vec<ChannelSample>],
        frames: &[Standardizer],
        graph: &NetworkGraph,
        cfg: &ProtocolConfig,
        seed: u64,
    ) -> Result<Self> {
        if datasets.len() != graph.num_nodes() || frames.len() != datasets.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} datasets, {} frames, {} graph nodes",
                datasets.len(),
                frames.len(),
                graph.num_nodes()
            )));
        }
        let mut nodes = Vec::with_capacity(datasets.len());
        for (g, data) in datasets.iter().enumerate() {
            let init_index = if cfg.shared_init { 0 } else { g as u64 };
            let mut init = ChaCha8Rng::seed_from_u64(derive_seed(seed, "init", init_index));
            let mut learner = LearnerState::new(&cfg.learner, data, frames[g].clone(), &mut init)?;
            let senders: BTreeMap<usize, usize> =
                graph.in_neighbors(g).into_iter().map(|j| (j, datasets[j].len())).collect();
            learner.mix = mix_weights(data.len(), &senders, cfg.eta, cfg.learner.mix_rule)?;
            nodes.push(NodeRuntime {
                learner,
                dataset_size: data.len(),
                rng: ChaCha8Rng::seed_from_u64(derive_seed(seed, "train", g as u64)),
            });
        }
        Ok(Self {
            round: 0,
            inboxes: vec![Vec::new(); nodes.len()],
            nodes,
            records: Vec::new(),
            shared_samples: 0,
            virtual_time_s: 0.0,
            seed,
        })
    }

    pub fn load(&self, rho: f64) -> f64 {
        self.shared_samples as f64 * rho
    }

    /// Records of the most recent round.
    pub fn last_round_records(&self) -> &[RoundRecord] {
        let n = self.nodes.len();
        &self.records[self.records.len().saturating_sub(n)..]
    }
}

/// Global reference used to score learners: per-direction truth histograms
/// in a fleet-wide frame.
#[derive(Debug, Clone)]
pub struct Evaluator {
    pub frame: Standardizer,
    pub binning: Binning2D,
    pub truth: Vec<Histogram>,
    pub samples_per_direction: usize,
    pub seed: u64,
}

impl Evaluator {
    pub fn new(
        truth: &[(Complex64, usize)],
        num_directions: usize,
        binning: Binning2D,
        samples_per_direction: usize,
        seed: u64,
    ) -> Result<Self> {
        let frame = Standardizer::fit(truth.iter().copied(), num_directions)?;
        let mut per_dir: Vec<Vec<[f64; 2]>> = vec![Vec::new(); num_directions];
        for &(g, d) in truth {
            per_dir[d - 1].push(frame.standardize(g, d));
        }
        let truth = per_dir.iter().map(|pts| Histogram::from_points(binning, pts)).collect::<Result<_>>()?;
        Ok(Self { frame, binning, truth, samples_per_direction, seed })
    }

    /// Histogram of a learner's generated gains for one direction, in the global frame.
    pub fn learned_histogram(&self, learner: &LearnerState, dir: usize, rng: &mut ChaCha8Rng) -> Result<Histogram> {
        let pts: Vec<[f64; 2]> = (0..self.samples_per_direction)
            .map(|_| {
                let g = learner.sampler();
                let z = g.sample_noise(rng);
                let raw = learner.frame.destandardize(g.generate(&z, dir), dir);
                self.frame.standardize(raw, dir)
            })
            .collect();
        Histogram::from_points(self.binning, &pts)
    }

    /// Average over directions of the JSD between learned and true gains.
    pub fn node_jsd(&self, learner: &LearnerState, node: usize, round: usize) -> Result<f64> {
        let mut rng = self.rng(node, round);
        let learned = (1..=self.truth.len())
            .map(|d| self.learned_histogram(learner, d, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        average_jsd(&learned, &self.truth)
    }

    fn rng(&self, node: usize, round: usize) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(derive_seed(self.seed, "eval", ((node as u64) << 32) | round as u64))
    }

    /// Mean `|D − ½|` over own real samples and as many generated ones.
    pub fn disc_deviation(&self, learner: &LearnerState, node: usize, round: usize, batch: usize) -> f64 {
        let mut rng = self.rng(node, round ^ 0x5EED_0000);
        let dirs = learner.num_directions();
        let mut total = 0.0;
        for _ in 0..batch {
            let s = learner.data[rng.random_range(0..learner.data.len())];
            total += (learner.discriminator.prob(s.x, s.cond) - 0.5).abs();
            let c = rng.random_range(1..=dirs);
            let g = learner.sampler();
            let z = g.sample_noise(&mut rng);
            total += (learner.discriminator.prob(g.generate(&z, c), c) - 0.5).abs();
        }
        total / (2 * batch) as f64
    }
}

struct NodeOutcome {
    published: Option<Arc<Vec<SharedSample>>>,
    value: f64,
    disc_mean: f64,
}

fn sample_fake(learner: &LearnerState, rng: &mut ChaCha8Rng, n: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let dirs = learner.num_directions();
    let conds: Vec<usize> = (0..n).map(|_| rng.random_range(1..=dirs)).collect();
    let noise = (0..n).map(|_| learner.generator.sample_noise(rng)).collect();
    (noise, conds)
}

/// Local training plus publication for one node; reads only its own inbox.
fn node_round(node: &mut NodeRuntime, inbox: &[SharedBatch], cfg: &ProtocolConfig, publish: bool) -> Result<NodeOutcome> {
    let o = cfg.learner.batch_size;
    let mut value = 0.0;
    let mut disc_mean = 0.5;
    let learner = &mut node.learner;
    let rng = &mut node.rng;

    // Weights of self and of each sender present in the inbox; absent senders fall back to own data.
    let mut weights = vec![learner.mix.self_weight];
    for b in inbox {
        weights.push(learner.mix.neighbor_weights.get(&b.sender).copied().unwrap_or(0.0));
    }
    let absent: f64 = learner.mix.neighbor_weights.iter().filter(|(j, _)| !inbox.iter().any(|b| b.sender == **j)).map(|(_, w)| w).sum();
    weights[0] += absent;
    let counts = mixture_counts(&weights, o);

    for _ in 0..cfg.learner.local_steps {
        let mut pos = Vec::with_capacity(o);
        for _ in 0..counts[0] {
            pos.push(learner.data[rng.random_range(0..learner.data.len())]);
        }
        let mut components: Vec<(f64, Vec<CondSample>)> = Vec::with_capacity(inbox.len());
        for (b, &n) in inbox.iter().zip(&counts[1..]) {
            let mut part = Vec::with_capacity(n);
            for _ in 0..n {
                let s = b.samples[rng.random_range(0..b.samples.len())];
                part.push(CondSample { x: learner.frame.standardize(s.gain, s.direction_index), cond: s.direction_index });
            }
            components.push((n as f64, part));
        }
        let real_part = pos.clone();
        pos.extend(components.iter().flat_map(|(_, p)| p.iter().copied()));

        let (noise, conds) = sample_fake(learner, rng, o);
        let neg: Vec<CondSample> =
            noise.iter().zip(&conds).map(|(z, &c)| CondSample { x: learner.generator.generate(z, c), cond: c }).collect();
        train_step_disc(&mut learner.discriminator, &mut learner.disc_opt, &pos, &neg, cfg.learner.disc_learning_rate)?;

        let (g_noise, g_conds) = sample_fake(learner, rng, o);
        train_step_gen(
            &mut learner.generator,
            &learner.discriminator,
            &mut learner.gen_opt,
            &g_noise,
            &g_conds,
            cfg.learner.gen_loss,
            cfg.learner.gen_learning_rate,
        )?;
        learner.update_average();

        let mut mixture: Vec<(f64, &[CondSample])> = vec![(counts[0] as f64, &real_part)];
        mixture.extend(components.iter().filter(|(w, _)| *w > 0.0).map(|(w, p)| (*w, p.as_slice())));
        value = mixed_value_function(&learner.discriminator, &learner.generator, &mixture, &noise, &conds);
        let d = &learner.discriminator;
        let outs: Vec<f64> = pos.iter().chain(&neg).map(|s| d.prob(s.x, s.cond)).collect();
        disc_mean = outs.iter().sum::<f64>() / outs.len() as f64;
    }

    let published = if publish {
        let quota = share_quota(cfg.eta, node.dataset_size);
        let (noise, conds) = sample_fake(learner, rng, quota);
        let batch = noise
            .iter()
            .zip(&conds)
            .map(|(z, &c)| SharedSample {
                gain: learner.frame.destandardize(learner.sampler().generate(z, c), c),
                direction_index: c,
            })
            .collect();
        Some(Arc::new(batch))
    } else {
        None
    };
    Ok(NodeOutcome { published, value, disc_mean })
}

/// One synchronous round: every node trains on its own data and last
/// round's inbox, then publishes `⌈ηH_g⌉` generated samples that its
/// out-neighbors will read next round.
pub fn run_round(state: &mut SimulationState, graph: &NetworkGraph, cfg: &ProtocolConfig, pool: &ThreadPool) -> Result<()> {
    let round = state.round + 1;
    let inboxes = std::mem::take(&mut state.inboxes);
    let publish: Vec<bool> = (0..state.nodes.len()).map(|g| cfg.eta > 0.0 && graph.out_degree(g) > 0).collect();
    let outcomes: Vec<Result<NodeOutcome>> = pool.install(|| {
        state
            .nodes
            .par_iter_mut()
            .zip(inboxes.par_iter())
            .enumerate()
            .map(|(g, (node, inbox))| node_round(node, inbox, cfg, publish[g]))
            .collect()
    });
    let outcomes = outcomes
        .into_iter()
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::DivergedAtRound { round, source: Box::new(e) })?;

    let mut next = vec![Vec::new(); state.nodes.len()];
    for (g, out) in outcomes.iter().enumerate() {
        if let Some(batch) = &out.published {
            let receivers = graph.out_neighbors(g);
            state.shared_samples += (batch.len() * receivers.len()) as u64;
            for j in receivers {
                next[j].push(SharedBatch { sender: g, samples: Arc::clone(batch) });
            }
        }
    }
    // Senders were visited in increasing order, so every inbox is already sorted.
    state.inboxes = next;
    state.round = round;
    state.virtual_time_s += cfg.share_slot_s + cfg.local_train_time_s;
    let load = state.load(cfg.rho);
    for (g, out) in outcomes.into_iter().enumerate() {
        state.records.push(RoundRecord { round, node: g, jsd: None, value: out.value, disc_mean: out.disc_mean, load_cum: load });
    }
    Ok(())
}

/// Score every node's generator and attach the JSD to this round's records.
pub fn evaluate_round(state: &mut SimulationState, evaluator: &Evaluator, pool: &ThreadPool) -> Result<Vec<f64>> {
    let round = state.round;
    let scores: Vec<Result<f64>> = pool.install(|| {
        state.nodes.par_iter().enumerate().map(|(g, n)| evaluator.node_jsd(&n.learner, g, round)).collect()
    });
    let scores = scores.into_iter().collect::<Result<Vec<_>>>()?;
    let n = state.nodes.len();
    let start = state.records.len().saturating_sub(n);
    for rec in &mut state.records[start..] {
        if rec.round == round {
            rec.jsd = Some(scores[rec.node]);
        }
    }
    Ok(scores)
}

/// Every node's discriminator sits near ½ and its generator near the truth.
pub fn all_at_equilibrium(state: &SimulationState, evaluator: &Evaluator, cfg: &ProtocolConfig, pool: &ThreadPool) -> Result<bool> {
    let round = state.round;
    let checks: Vec<Result<bool>> = pool.install(|| {
        state
            .nodes
            .par_iter()
            .enumerate()
            .map(|(g, n)| {
                let dev = evaluator.disc_deviation(&n.learner, g, round, cfg.learner.batch_size);
                Ok(dev < cfg.eps_d && evaluator.node_jsd(&n.learner, g, round)? < cfg.eps_jsd)
            })
            .collect()
    });
    Ok(checks.into_iter().collect::<Result<Vec<_>>>()?.into_iter().all(|b| b))
}

/// Train until every node passes the equilibrium check or `max_rounds` elapse.
/// The check runs before the first round. Returns rounds used and whether
/// equilibrium was reached.
pub fn run_until_ne(
    state: &mut SimulationState,
    graph: &NetworkGraph,
    cfg: &ProtocolConfig,
    evaluator: &Evaluator,
    max_rounds: usize,
    pool: &ThreadPool,
) -> Result<(usize, bool)> {
    if all_at_equilibrium(state, evaluator, cfg, pool)? {
        return Ok((0, true));
    }
    for used in 1..=max_rounds {
        run_round(state, graph, cfg, pool)?;
        if all_at_equilibrium(state, evaluator, cfg, pool)? {
            return Ok((used, true));
        }
    }
    Ok((max_rounds, false))
}
