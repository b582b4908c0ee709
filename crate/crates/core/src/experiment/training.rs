use rayon::ThreadPool;

use crate::channel::ChannelSample;
use crate::config::{derive_seed, ScenarioConfig};
use crate::error::{Error, Result};
use crate::learner::Binning2D;
use crate::protocol::{Evaluator, ProtocolConfig, SchemeContext, SchemeRegistry, SchemeRun};
use crate::scenario::Scenario;
use crate::topology::NetworkGraph;

/// Everything a training run needs, derived from one config and seed.
#[derive(Debug, Clone)]
pub struct TrainingSetup {
    pub scenario: Scenario,
    pub datasets: Vec<Vec<ChannelSample>>,
    pub graph: NetworkGraph,
    pub evaluator: Evaluator,
    pub protocol: ProtocolConfig,
}

impl TrainingSetup {
    pub fn new(config: &ScenarioConfig, seed: u64) -> Result<Self> {
        let scenario = Scenario::new(config, seed)?;
        let datasets = scenario.datasets()?;
        let graph = scenario.topology()?;
        let e = &config.eval;
        let truth = scenario.truth_sample(e.jsd_samples)?;
        let evaluator = Evaluator::new(
            &truth,
            config.radio.directions,
            Binning2D::symmetric(e.jsd_bins, e.jsd_half_width),
            e.jsd_samples,
            derive_seed(seed, "evaluator", 0),
        )?;
        Ok(Self { scenario, datasets, graph, evaluator, protocol: protocol_config(config) })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.scenario.config
    }

    pub fn seed(&self) -> u64 {
        self.scenario.seed
    }

    /// Run one named scheme for `rounds` rounds.
    pub fn run(&self, scheme: &str, rounds: usize, pool: &ThreadPool) -> Result<SchemeRun> {
        let l = &self.config().learning;
        let ctx = SchemeContext {
            datasets: &self.datasets,
            graph: &self.graph,
            evaluator: &self.evaluator,
            protocol: &self.protocol,
            frame: l.frame,
            rounds,
            jsd_every: l.jsd_every,
            averaging_period: l.averaging_period,
            seed: derive_seed(self.seed(), "training", 0),
            pool,
        };
        SchemeRegistry::standard().get(scheme)?.run(&ctx)
    }
}

pub fn protocol_config(config: &ScenarioConfig) -> ProtocolConfig {
    let l = &config.learning;
    ProtocolConfig {
        eta: l.eta,
        rho: l.rho,
        learner: l.learner.clone(),
        share_slot_s: l.share_slot_s,
        local_train_time_s: l.local_train_time_s,
        eps_d: l.eps_d,
        eps_jsd: l.eps_jsd,
        shared_init: false,
    }
}

/// Thread pool of exactly `workers` threads (at least one).
pub fn worker_pool(workers: usize) -> Result<ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Parse(format!("thread pool: {e}")))
}
