//! Training studies: JSD traces per scheme and beam-selection rate of the
//! learned gain models.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::ThreadPool;

use super::training::TrainingSetup;
use crate::channel::true_gain;
use crate::config::{derive_seed, ScenarioConfig};
use crate::error::Result;
use crate::protocol::{SchemeRun, SimulationState};
use crate::topology::{dbm_to_watts, rate_from_snr};

pub const JSD_HEADER: &str = "scheme,round,jsd";
pub const RATE_HEADER: &str = "fleet_size,learned_rate_bps,genie_rate_bps,ratio";

/// Reuse `dir/name` when an earlier run left it behind, otherwise compute
/// and store it. With no directory this is just `compute()`.
pub fn cached_part(dir: Option<&Path>, name: &str, compute: impl FnOnce() -> Result<String>) -> Result<String> {
    let Some(dir) = dir else {
        return compute();
    };
    let path = dir.join(name);
    if let Ok(text) = fs::read_to_string(&path) {
        return Ok(text);
    }
    let text = compute()?;
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!("{name}.tmp"));
    fs::write(&tmp, &text)?;
    fs::rename(&tmp, &path)?;
    Ok(text)
}

/// `scheme,round,jsd` rows of one run, without the header.
pub fn jsd_rows(run: &SchemeRun) -> String {
    let mut out = String::new();
    for (round, j) in &run.jsd_trace {
        writeln!(out, "{},{round},{j}", run.scheme).expect("writing to a String");
    }
    out
}

/// Average JSD trace of each scheme on the same scenario and seed.
pub fn experiment_jsd(
    config: &ScenarioConfig,
    seed: u64,
    schemes: &[&str],
    pool: &ThreadPool,
    parts: Option<&Path>,
) -> Result<String> {
    let setup = TrainingSetup::new(config, seed)?;
    let mut out = format!("{JSD_HEADER}\n");
    for scheme in schemes {
        let rows = cached_part(parts, &format!("jsd-{scheme}.csv"), || {
            Ok(jsd_rows(&setup.run(scheme, config.learning.rounds, pool)?))
        })?;
        out.push_str(&rows);
    }
    Ok(out)
}

/// Average downlink rates of learned and genie beam choices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSummary {
    pub learned_bps: f64,
    pub genie_bps: f64,
}

impl RateSummary {
    pub fn ratio(&self) -> f64 {
        if self.genie_bps > 0.0 {
            self.learned_bps / self.genie_bps
        } else {
            0.0
        }
    }
}

/// Per-node direction whose generated gains carry the most mean power.
pub fn learned_beams(state: &SimulationState, samples: usize, seed: u64) -> Vec<usize> {
    state
        .nodes
        .iter()
        .enumerate()
        .map(|(g, node)| {
            let learner = &node.learner;
            let gen = learner.sampler();
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "beam", g as u64));
            let power = |dir: usize, rng: &mut ChaCha8Rng| -> f64 {
                (0..samples)
                    .map(|_| learner.frame.destandardize(gen.generate(&gen.sample_noise(rng), dir), dir).norm_sqr())
                    .sum::<f64>()
                    / samples.max(1) as f64
            };
            let mut best = (1, f64::NEG_INFINITY);
            for dir in 1..=learner.num_directions() {
                let p = power(dir, &mut rng);
                if p > best.1 {
                    best = (dir, p);
                }
            }
            best.0
        })
        .collect()
}

/// Score each node's learned beam against the per-position best beam under
/// the true channel. Rates average over test positions, then over nodes.
pub fn beam_selection_rate(setup: &TrainingSetup, state: &SimulationState) -> Result<RateSummary> {
    let cfg = setup.config();
    let r = &cfg.radio;
    let e = &cfg.eval;
    let scenario = &setup.scenario;
    let noise = dbm_to_watts(r.noise_dbm_per_hz + 10.0 * r.bandwidth_hz.log10());
    let scale = dbm_to_watts(r.max_power_dbm) * (r.tx_antennas * r.rx_antennas) as f64 / noise;
    let rate = |gain_power: f64| rate_from_snr(r.bandwidth_hz, scale * gain_power);
    let beams = learned_beams(state, e.rate_model_samples, derive_seed(setup.seed(), "rate", 0));
    let (mut learned, mut genie) = (0.0, 0.0);
    for (g, &beam) in beams.iter().enumerate() {
        let points = scenario.test_points(g, e.rate_test_points);
        let (mut l, mut best) = (0.0, 0.0);
        for p in &points {
            let powers = (1..=r.directions)
                .map(|d| Ok(true_gain(&scenario.field, p.u, p.v, p.t, d)?.norm_sqr()))
                .collect::<Result<Vec<f64>>>()?;
            l += rate(powers[beam - 1]);
            best += rate(powers.iter().copied().fold(0.0, f64::max));
        }
        learned += l / points.len().max(1) as f64;
        genie += best / points.len().max(1) as f64;
    }
    let n = beams.len().max(1) as f64;
    Ok(RateSummary { learned_bps: learned / n, genie_bps: genie / n })
}

/// Beam-selection rate after distributed training, for each fleet size.
pub fn experiment_rate(
    config: &ScenarioConfig,
    seed: u64,
    fleet_sizes: &[usize],
    pool: &ThreadPool,
    parts: Option<&Path>,
) -> Result<String> {
    let mut out = format!("{RATE_HEADER}\n");
    for &g in fleet_sizes {
        let row = cached_part(parts, &format!("rate-{g}.csv"), || {
            let mut cfg = config.clone();
            cfg.fleet.size = g;
            cfg.fleet.resource_blocks = cfg.fleet.resource_blocks.max(g);
            if cfg.fleet.positions.as_ref().is_some_and(|p| p.len() != g) {
                cfg.fleet.positions = None;
            }
            let setup = TrainingSetup::new(&cfg, seed)?;
            let run = setup.run("distributed", cfg.learning.rounds, pool)?;
            let s = beam_selection_rate(&setup, &run.state)?;
            Ok(format!("{g},{},{},{}\n", s.learned_bps, s.genie_bps, s.ratio()))
        })?;
        out.push_str(&row);
    }
    Ok(out)
}
