use std::collections::BTreeMap;

use rayon::ThreadPool;

use super::engine::{evaluate_round, run_round, Evaluator, ProtocolConfig, SimulationState};
use crate::channel::ChannelSample;
use crate::config::FrameKind;
use crate::error::{Error, Result};
use crate::learner::Standardizer;
use crate::topology::NetworkGraph;

/// Inputs shared by every training scheme.
pub struct SchemeContext<'a> {
    pub datasets: &'a [Vec<ChannelSample>],
    pub graph: &'a NetworkGraph,
    pub evaluator: &'a Evaluator,
    pub protocol: &'a ProtocolConfig,
    pub frame: FrameKind,
    pub rounds: usize,
    /// Score generators every this many rounds and after the last one.
    pub jsd_every: usize,
    pub averaging_period: usize,
    pub seed: u64,
    pub pool: &'a ThreadPool,
}

impl SchemeContext<'_> {
    fn num_directions(&self) -> usize {
        self.evaluator.truth.len()
    }

    fn frames(&self, datasets: &[Vec<ChannelSample>]) -> Result<Vec<Standardizer>> {
        node_frames(self.frame, datasets, self.num_directions())
    }

    fn is_eval_round(&self, round: usize) -> bool {
        round == self.rounds || (self.jsd_every > 0 && round % self.jsd_every == 0)
    }
}

/// Standardization frame of every node: one pooled frame shared by the
/// fleet, or each node's own.
pub fn node_frames(kind: FrameKind, datasets: &[Vec<ChannelSample>], num_directions: usize) -> Result<Vec<Standardizer>> {
    match kind {
        FrameKind::Fleet => {
            let pooled = Standardizer::fit_dataset(&datasets.concat(), num_directions)?;
            Ok(vec![pooled; datasets.len()])
        }
        FrameKind::Local => datasets.iter().map(|d| Standardizer::fit_dataset(d, num_directions)).collect(),
    }
}

/// Result of one scheme run.
#[derive(Debug, Clone)]
pub struct SchemeRun {
    pub scheme: String,
    pub state: SimulationState,
    /// `(round, average JSD over nodes)` at every scored round.
    pub jsd_trace: Vec<(usize, f64)>,
}

impl SchemeRun {
    pub fn final_jsd(&self) -> Option<f64> {
        self.jsd_trace.last().map(|&(_, j)| j)
    }
}

/// A way of training the fleet's generators.
pub trait TrainingScheme: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, ctx: &SchemeContext<'_>) -> Result<SchemeRun>;
}

fn drive(
    name: &str,
    ctx: &SchemeContext<'_>,
    mut state: SimulationState,
    graph: &NetworkGraph,
    protocol: &ProtocolConfig,
    mut after_round: impl FnMut(&mut SimulationState),
) -> Result<SchemeRun> {
    let mut jsd_trace = Vec::new();
    for round in 1..=ctx.rounds {
        run_round(&mut state, graph, protocol, ctx.pool)?;
        after_round(&mut state);
        if ctx.is_eval_round(round) {
            let scores = evaluate_round(&mut state, ctx.evaluator, ctx.pool)?;
            jsd_trace.push((round, scores.iter().sum::<f64>() / scores.len() as f64));
        }
    }
    Ok(SchemeRun { scheme: name.into(), state, jsd_trace })
}

/// Sample sharing over the configured topology.
pub struct Distributed;

impl TrainingScheme for Distributed {
    fn name(&self) -> &'static str {
        "distributed"
    }

    fn run(&self, ctx: &SchemeContext<'_>) -> Result<SchemeRun> {
        let frames = ctx.frames(ctx.datasets)?;
        let state = SimulationState::new(ctx.datasets, &frames, ctx.graph, ctx.protocol, ctx.seed)?;
        drive(self.name(), ctx, state, ctx.graph, ctx.protocol, |_| {})
    }
}

/// Every node trains alone: the distributed protocol with `η = 0`.
pub struct Standalone;

fn without_sharing(p: &ProtocolConfig) -> ProtocolConfig {
    ProtocolConfig { eta: 0.0, ..p.clone() }
}

impl TrainingScheme for Standalone {
    fn name(&self) -> &'static str {
        "standalone"
    }

    fn run(&self, ctx: &SchemeContext<'_>) -> Result<SchemeRun> {
        let protocol = without_sharing(ctx.protocol);
        let frames = ctx.frames(ctx.datasets)?;
        let state = SimulationState::new(ctx.datasets, &frames, ctx.graph, &protocol, ctx.seed)?;
        drive(self.name(), ctx, state, ctx.graph, &protocol, |_| {})
    }
}

/// One learner trained on the union of all datasets.
pub struct Centralized;

impl TrainingScheme for Centralized {
    fn name(&self) -> &'static str {
        "centralized"
    }

    fn run(&self, ctx: &SchemeContext<'_>) -> Result<SchemeRun> {
        let protocol = without_sharing(ctx.protocol);
        let pooled = vec![ctx.datasets.concat()];
        let frames = vec![Standardizer::fit_dataset(&pooled[0], ctx.num_directions())?];
        let graph = NetworkGraph::new(1, 0);
        let state = SimulationState::new(&pooled, &frames, &graph, &protocol, ctx.seed)?;
        drive(self.name(), ctx, state, &graph, &protocol, |_| {})
    }
}

/// Independent local training with an elementwise parameter mean broadcast
/// every `averaging_period` rounds.
pub struct ParameterAveraging;

/// Replace every node's generator and discriminator parameters by their mean.
pub fn average_parameters(state: &mut SimulationState) {
    fn mean<'a>(rows: impl Iterator<Item = &'a [f64]>) -> Vec<f64> {
        let mut acc: Vec<f64> = Vec::new();
        let mut n = 0.0;
        for row in rows {
            if acc.is_empty() {
                acc = vec![0.0; row.len()];
            }
            acc.iter_mut().zip(row).for_each(|(a, p)| *a += p);
            n += 1.0;
        }
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }
    let gen = mean(state.nodes.iter().map(|n| n.learner.generator.net.params()));
    let disc = mean(state.nodes.iter().map(|n| n.learner.discriminator.net.params()));
    let avg = mean(state.nodes.iter().filter_map(|n| n.learner.generator_avg.as_ref()).map(|g| g.net.params()));
    for node in &mut state.nodes {
        node.learner.generator.net.params_mut().copy_from_slice(&gen);
        node.learner.discriminator.net.params_mut().copy_from_slice(&disc);
        if let Some(g) = &mut node.learner.generator_avg {
            g.net.params_mut().copy_from_slice(&avg);
        }
    }
}

impl TrainingScheme for ParameterAveraging {
    fn name(&self) -> &'static str {
        "parameter_averaging"
    }

    fn run(&self, ctx: &SchemeContext<'_>) -> Result<SchemeRun> {
        let protocol = without_sharing(ctx.protocol);
        let frames = ctx.frames(ctx.datasets)?;
        let state = SimulationState::new(ctx.datasets, &frames, ctx.graph, &protocol, ctx.seed)?;
        let period = ctx.averaging_period.max(1);
        drive(self.name(), ctx, state, ctx.graph, &protocol, |s| {
            if s.round % period == 0 {
                average_parameters(s);
            }
        })
    }
}

/// Schemes selectable by name.
pub struct SchemeRegistry {
    schemes: BTreeMap<&'static str, Box<dyn TrainingScheme>>,
}

impl SchemeRegistry {
    pub fn empty() -> Self {
        Self { schemes: BTreeMap::new() }
    }

    /// Distributed sharing plus the three baselines.
    pub fn standard() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(Distributed));
        r.register(Box::new(Standalone));
        r.register(Box::new(Centralized));
        r.register(Box::new(ParameterAveraging));
        r
    }

    pub fn register(&mut self, scheme: Box<dyn TrainingScheme>) {
        self.schemes.insert(scheme.name(), scheme);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.schemes.keys().copied().collect()
    }

    pub fn get(&self, name: &str) -> Result<&dyn TrainingScheme> {
        self.schemes.get(name).map(|s| s.as_ref()).ok_or_else(|| Error::UnknownBaseline(name.into()))
    }
}

/// Run a scheme looked up by name in the standard registry.
pub fn run_baseline(scheme: &str, ctx: &SchemeContext<'_>) -> Result<SchemeRun> {
    SchemeRegistry::standard().get(scheme)?.run(ctx)
}
