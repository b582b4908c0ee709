//! Closed-form studies: convergence curves against resource budget and
//! fleet size, and communication load against resource budget.

use std::fmt::Write as _;

use crate::config::ScenarioConfig;
use crate::convergence::{communication_load, convergence_curve, iterations_for_target, ConvergenceParams};
use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::topology::NetworkGraph;

pub const FIG3_HEADER: &str = "blocks,iteration,probability,status";
pub const FIG4_HEADER: &str = "fleet_size,iteration,probability,status";
pub const OVERHEAD_HEADER: &str = "blocks,iterations,num_edges,load_ring,load_topology,iterations_to_target,load_to_target,status";

/// Convergence parameters of a built topology under a config.
pub fn convergence_params(config: &ScenarioConfig, graph: &NetworkGraph) -> Result<ConvergenceParams> {
    let c = &config.convergence;
    ConvergenceParams::from_graph(
        graph,
        config.learning.eta,
        config.learning.training_error,
        c.gamma,
        c.target_probability,
        c.iteration_cap,
    )
}

/// Topology for `config` under `seed`, with fleet size and budget overridden.
pub fn topology_for(config: &ScenarioConfig, seed: u64, fleet_size: usize, blocks: usize) -> Result<NetworkGraph> {
    let mut cfg = config.clone();
    cfg.fleet.size = fleet_size;
    cfg.fleet.resource_blocks = blocks;
    if cfg.fleet.positions.as_ref().is_some_and(|p| p.len() != fleet_size) {
        cfg.fleet.positions = None;
    }
    Scenario::new(&cfg, seed)?.topology()
}

/// `iteration,probability` rows of one curve, from iteration 0.
pub fn curve_csv(config: &ScenarioConfig, graph: &NetworkGraph) -> Result<String> {
    let params = convergence_params(config, graph)?;
    let mut out = String::from("iteration,probability\n");
    for (i, p) in convergence_curve(&params, config.convergence.curve_iterations).iter().enumerate() {
        writeln!(out, "{i},{p}").expect("writing to a String");
    }
    Ok(out)
}

/// Curve rows prefixed by `key`; a failed topology becomes one row carrying the error kind.
fn keyed_curve(config: &ScenarioConfig, key: usize, graph: Result<NetworkGraph>, out: &mut String) -> Result<()> {
    match graph.and_then(|g| convergence_params(config, &g)) {
        Ok(params) => {
            for (i, p) in convergence_curve(&params, config.convergence.curve_iterations).iter().enumerate() {
                writeln!(out, "{key},{i},{p},ok").expect("writing to a String");
            }
            Ok(())
        }
        Err(e @ (Error::NoFeasibleTopology(_) | Error::NotStronglyConnected)) => {
            writeln!(out, "{key},,,{}", e.kind()).expect("writing to a String");
            Ok(())
        }
        Err(e) => Err(e),
    }
}

/// Convergence probability against iteration for each resource budget at the configured fleet size.
pub fn experiment_fig3(config: &ScenarioConfig, seed: u64, block_counts: &[usize]) -> Result<String> {
    let mut out = format!("{FIG3_HEADER}\n");
    for &b in block_counts {
        keyed_curve(config, b, topology_for(config, seed, config.fleet.size, b), &mut out)?;
    }
    Ok(out)
}

/// Convergence probability against iteration for each fleet size at a fixed budget.
pub fn experiment_fig4(config: &ScenarioConfig, seed: u64, fleet_sizes: &[usize], blocks: usize) -> Result<String> {
    let mut out = format!("{FIG4_HEADER}\n");
    for &g in fleet_sizes {
        keyed_curve(config, g, topology_for(config, seed, g, blocks), &mut out)?;
    }
    Ok(out)
}

/// Load at the configured round count, on the ring alone and on the
/// budgeted topology, plus the load spent until the target probability.
pub fn experiment_overhead(config: &ScenarioConfig, seed: u64, block_counts: &[usize]) -> Result<String> {
    let l = &config.learning;
    let rounds = l.rounds as u64;
    let g = config.fleet.size;
    let sizes = vec![config.fleet.dataset_size; g];
    let mut out = format!("{OVERHEAD_HEADER}\n");
    for &b in block_counts {
        let graph = match topology_for(config, seed, g, b) {
            Ok(graph) => graph,
            Err(e @ (Error::NoFeasibleTopology(_) | Error::NotStronglyConnected)) => {
                writeln!(out, "{b},{rounds},,,,,,{}", e.kind()).expect("writing to a String");
                continue;
            }
            Err(e) => return Err(e),
        };
        let degrees: Vec<usize> = (0..g).map(|n| graph.out_degree(n)).collect();
        let load_ring = communication_load(rounds, l.eta, &sizes, l.rho, &vec![1; g]);
        let load_topology = communication_load(rounds, l.eta, &sizes, l.rho, &degrees);
        let (to_target, load_to_target, status) = match iterations_for_target(&convergence_params(config, &graph)?) {
            Ok(i) => {
                let load = communication_load(u64::from(i), l.eta, &sizes, l.rho, &degrees);
                (i.to_string(), load.to_string(), "ok")
            }
            Err(e @ Error::TargetUnreachable { .. }) => (String::new(), String::new(), e.kind()),
            Err(e) => return Err(e),
        };
        writeln!(
            out,
            "{b},{rounds},{},{load_ring},{load_topology},{to_target},{load_to_target},{status}",
            graph.num_edges()
        )
        .expect("writing to a String");
    }
    Ok(out)
}
