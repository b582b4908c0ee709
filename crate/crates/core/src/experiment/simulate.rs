//! One end-to-end distributed training run with every artifact on disk.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use rayon::ThreadPool;

use super::training::TrainingSetup;
use crate::channel::write_dataset_csv;
use crate::config::{derive_seed, ScenarioConfig};
use crate::error::Result;
use crate::learner::write_checkpoint;
use crate::protocol::{evaluate_round, node_frames, run_round, write_metrics_csv, SimulationState};
use crate::topology::{write_edges_csv, write_summary_json};

/// Headline numbers of a finished simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSummary {
    pub rounds: usize,
    pub final_jsd: Option<f64>,
    pub shared_samples: u64,
    pub load: f64,
}

fn write_checkpoints(state: &SimulationState, dir: &Path, tag: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (g, node) in state.nodes.iter().enumerate() {
        let f = BufWriter::new(File::create(dir.join(format!("node_{g}{tag}.ckpt")))?);
        write_checkpoint(&node.learner, f)?;
    }
    Ok(())
}

/// Train the fleet with sample sharing and write `config.snapshot`,
/// `topology.csv`, `topology_summary.json`, `datasets/node_<g>.csv`,
/// `metrics.csv` and `checkpoints/` under `out_dir`.
pub fn simulate(config: &ScenarioConfig, seed: u64, out_dir: &Path, pool: &ThreadPool) -> Result<SimulationSummary> {
    let setup = TrainingSetup::new(config, seed)?;
    fs::create_dir_all(out_dir)?;

    let mut snapshot = config.clone();
    snapshot.seeds.master = seed;
    fs::write(out_dir.join("config.snapshot"), snapshot.to_toml_string()?)?;
    write_edges_csv(&setup.graph, BufWriter::new(File::create(out_dir.join("topology.csv"))?))?;
    write_summary_json(&setup.graph, BufWriter::new(File::create(out_dir.join("topology_summary.json"))?))?;
    let data_dir = out_dir.join("datasets");
    fs::create_dir_all(&data_dir)?;
    for (g, d) in setup.datasets.iter().enumerate() {
        write_dataset_csv(d, BufWriter::new(File::create(data_dir.join(format!("node_{g}.csv")))?))?;
    }

    let l = &config.learning;
    let frames = node_frames(l.frame, &setup.datasets, config.radio.directions)?;
    let mut state =
        SimulationState::new(&setup.datasets, &frames, &setup.graph, &setup.protocol, derive_seed(seed, "training", 0))?;
    let ckpt_dir = out_dir.join("checkpoints");
    let mut final_jsd = None;
    for round in 1..=l.rounds {
        run_round(&mut state, &setup.graph, &setup.protocol, pool)?;
        if round == l.rounds || (l.jsd_every > 0 && round % l.jsd_every == 0) {
            let scores = evaluate_round(&mut state, &setup.evaluator, pool)?;
            final_jsd = Some(scores.iter().sum::<f64>() / scores.len() as f64);
        }
        if l.checkpoint_every > 0 && round % l.checkpoint_every == 0 && round != l.rounds {
            write_checkpoints(&state, &ckpt_dir, &format!("_round_{round}"))?;
        }
    }
    write_checkpoints(&state, &ckpt_dir, "")?;
    write_metrics_csv(&state.records, BufWriter::new(File::create(out_dir.join("metrics.csv"))?))?;
    Ok(SimulationSummary {
        rounds: l.rounds,
        final_jsd,
        shared_samples: state.shared_samples,
        load: state.load(l.rho),
    })
}
