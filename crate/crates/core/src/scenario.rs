//! Turns a [`ScenarioConfig`] and a seed into concrete geometry, a
//! ground-truth field, per-node datasets and the sharing topology.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{collect_dataset, ChannelSample, Codebook, GroundTruthField, TrajectoryPoint, Vec3};
use crate::config::{derive_seed, ScenarioConfig};
use crate::convergence::{cumulative_convergence_prob, iterations_for_target, ConvergenceParams};
use crate::error::{Error, Result};
use crate::topology::{augment_and_prune, construct_ring, dbm_to_watts, FeasibleSets, LinkConfig, NetworkGraph};

/// Trajectory index where held-out evaluation points start.
const HELD_OUT_OFFSET: usize = 1 << 20;
/// Trajectory index where beam-selection test points start.
const TEST_OFFSET: usize = 1 << 21;

#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub seed: u64,
    /// Orbit center of each UAV.
    pub centers: Vec<Vec3>,
    phases: Vec<f64>,
    pub field: GroundTruthField,
    pub codebook: Codebook,
}

impl Scenario {
    pub fn new(config: &ScenarioConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let f = &config.fleet;
        let r = &config.radio;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "layout", 0));
        let gs = f.ground_station;
        let sector = f.sector_deg.to_radians();
        let slot = sector / f.size as f64;
        let generated: Vec<Vec3> = (0..f.size)
            .map(|g| {
                let bearing = -sector / 2.0 + slot * (g as f64 + rng.random_range(0.25..0.75));
                let range = rng.random_range(f.min_range_m..=f.max_range_m);
                [gs[0] + range * bearing.cos(), gs[1] + range * bearing.sin(), f.altitude_m]
            })
            .collect();
        let centers = f.positions.clone().unwrap_or(generated);
        let phases = (0..f.size).map(|_| rng.random_range(0.0..TAU)).collect();
        let codebook = Codebook::uniform(r.directions, r.tx_antennas, r.rx_antennas)?;
        let field = GroundTruthField {
            pathloss_exponent: r.pathloss_exponent,
            reference_gain_db: -crate::topology::free_space_path_loss(1.0, r.carrier_frequency_hz)?,
            rician_k_db: vec![r.rician_k_db; r.directions],
            carrier_frequency: r.carrier_frequency_hz,
            directivity: r.directivity,
            directions: codebook.departure_angles(),
            rng_seed: derive_seed(seed, "field", 0),
        };
        Ok(Self { config: config.clone(), seed, centers, phases, field, codebook })
    }

    pub fn fleet_size(&self) -> usize {
        self.centers.len()
    }

    pub fn ground_station(&self) -> Vec3 {
        self.config.fleet.ground_station
    }

    pub fn link_config(&self) -> LinkConfig {
        let r = &self.config.radio;
        LinkConfig {
            max_power_dbm: r.max_power_dbm,
            link_tx_power_dbm: r.link_tx_power_dbm,
            noise_dbm_per_hz: r.noise_dbm_per_hz,
            bandwidth_hz: r.bandwidth_hz,
            snr_threshold_db: r.snr_threshold_db,
            share_deadline_s: self.config.learning.share_slot_s,
            frequency_hz: r.carrier_frequency_hz,
            pathloss_exponent: r.pathloss_exponent,
            eta: self.config.learning.eta,
            rho: self.config.learning.rho,
            dataset_sizes: vec![self.config.fleet.dataset_size; self.fleet_size()],
        }
    }

    pub fn feasible_sets(&self) -> Result<FeasibleSets> {
        FeasibleSets::compute(&self.centers, &self.link_config())
    }

    /// Ring over the budgeted feasible sets, augmented and pruned for every
    /// budget from `G` up to the configured one; the candidate whose
    /// convergence curve reaches the target soonest wins, fewer edges
    /// breaking ties.
    pub fn topology(&self) -> Result<NetworkGraph> {
        let sets = self.feasible_sets()?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, "ring", 0));
        let ring = construct_ring(&sets, &mut rng)?;
        let budget = self.config.fleet.resource_blocks;
        let mut best: Option<((u32, f64, usize), NetworkGraph)> = None;
        for b in ring.num_nodes()..=budget {
            let mut candidate = augment_and_prune(&ring, &sets, b)?;
            candidate.set_resource_blocks(budget)?;
            let key = self.convergence_key(&candidate)?;
            let better = match &best {
                None => true,
                Some((k, _)) => key.0.cmp(&k.0).then(key.1.total_cmp(&k.1)).then(key.2.cmp(&k.2)).is_lt(),
            };
            if better {
                best = Some((key, candidate));
            }
        }
        Ok(best.expect("budget is at least the fleet size").1)
    }

    /// `(iterations to target, −P at the cap, edges)`; smaller is faster.
    fn convergence_key(&self, graph: &NetworkGraph) -> Result<(u32, f64, usize)> {
        let c = &self.config.convergence;
        let l = &self.config.learning;
        let params =
            ConvergenceParams::from_graph(graph, l.eta, l.training_error, c.gamma, c.target_probability, c.iteration_cap)?;
        let hit = match iterations_for_target(&params) {
            Ok(i) => i,
            Err(Error::TargetUnreachable { .. }) => u32::MAX,
            Err(e) => return Err(e),
        };
        Ok((hit, -cumulative_convergence_prob(&params, c.iteration_cap), graph.num_edges()))
    }

    /// UAV position at trajectory step `k` on its orbit.
    pub fn trajectory_point(&self, node: usize, k: usize) -> TrajectoryPoint {
        let f = &self.config.fleet;
        let t = k as f64 * f.sample_interval_s;
        let angle = self.phases[node] + 2.0 * PI * t / f.orbit_period_s;
        let c = self.centers[node];
        TrajectoryPoint {
            u: [c[0] + f.orbit_radius_m * angle.cos(), c[1] + f.orbit_radius_m * angle.sin(), c[2]],
            v: self.ground_station(),
            t,
        }
    }

    fn pilot_and_noise(&self) -> (f64, f64) {
        let r = &self.config.radio;
        (dbm_to_watts(r.pilot_power_dbm), dbm_to_watts(r.noise_dbm_per_hz + 10.0 * r.bandwidth_hz.log10()))
    }

    fn collect(&self, node: usize, first: usize, count: usize, stream: &str) -> Result<Vec<ChannelSample>> {
        let points: Vec<TrajectoryPoint> = (first..first + count).map(|k| self.trajectory_point(node, k)).collect();
        let (pilot, noise) = self.pilot_and_noise();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, stream, node as u64));
        collect_dataset(&self.field, &self.codebook, &points, pilot, noise, &mut rng)
    }

    /// The `H_g` training records of one UAV.
    pub fn dataset(&self, node: usize) -> Result<Vec<ChannelSample>> {
        let h = self.config.fleet.dataset_size;
        let points = h.div_ceil(self.codebook.len());
        let mut data = self.collect(node, 0, points, "pilot")?;
        data.truncate(h);
        Ok(data)
    }

    pub fn datasets(&self) -> Result<Vec<Vec<ChannelSample>>> {
        (0..self.fleet_size()).map(|g| self.dataset(g)).collect()
    }

    /// Fresh records from later trajectory points, `points` per UAV.
    pub fn held_out(&self, node: usize, points: usize) -> Result<Vec<ChannelSample>> {
        self.collect(node, HELD_OUT_OFFSET, points, "held-out")
    }

    /// Positions used to score beam selection, disjoint from training and held-out points.
    pub fn test_points(&self, node: usize, count: usize) -> Vec<TrajectoryPoint> {
        (TEST_OFFSET..TEST_OFFSET + count).map(|k| self.trajectory_point(node, k)).collect()
    }

    /// Global reference sample: equal shares of fresh records from every UAV's region.
    pub fn truth_sample(&self, per_direction: usize) -> Result<Vec<(Complex64, usize)>> {
        let points = per_direction.div_ceil(self.fleet_size());
        let mut out = Vec::with_capacity(points * self.fleet_size() * self.codebook.len());
        for g in 0..self.fleet_size() {
            out.extend(self.held_out(g, points)?.into_iter().map(|s| (s.gain_estimate, s.direction_index)));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ScenarioConfig {
        let mut c = ScenarioConfig::default();
        c.radio.directions = 4;
        c.radio.tx_antennas = 8;
        c.radio.rx_antennas = 4;
        c.fleet.dataset_size = 30;
        c
    }

    #[test]
    fn dataset_has_configured_size() {
        let s = Scenario::new(&small(), 1).unwrap();
        let d = s.dataset(0).unwrap();
        assert_eq!(d.len(), 30);
        assert_eq!(d, s.dataset(0).unwrap());
        assert!(d.windows(2).all(|w| w[0].t <= w[1].t));
    }

    #[test]
    fn layout_is_seeded() {
        let a = Scenario::new(&small(), 1).unwrap();
        let b = Scenario::new(&small(), 1).unwrap();
        let c = Scenario::new(&small(), 2).unwrap();
        assert_eq!(a.centers, b.centers);
        assert_ne!(a.centers, c.centers);
    }

    #[test]
    fn default_fleet_forms_a_ring() {
        let s = Scenario::new(&small(), 7).unwrap();
        let g = s.topology().unwrap();
        assert_eq!(g.num_edges(), 5);
    }
}
