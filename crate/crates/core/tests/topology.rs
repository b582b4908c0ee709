mod common;

use std::collections::BTreeSet;

use common::{edge_list, fw_diameter, fw_min_loop, hamiltonian_cycles, random_sets};
use fleetgan::topology::{
    augment_and_prune, construct_ring, dbm_to_watts, max_shortest_path, min_loops, read_edges_csv, write_edges_csv,
    FeasibleSets, Link, LinkConfig, NetworkGraph,
};
use fleetgan::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn complete(n: usize) -> FeasibleSets {
    FeasibleSets::from_sets((0..n).map(|g| (0..n).filter(|&j| j != g).collect()).collect())
}

fn unit_link() -> Link {
    Link { tx_power_dbm: 0.0, path_loss_db: 0.0, rate_bps: 1.0 }
}

/// Ring `0 → 1 → … → n−1 → 0` plus random chords.
fn random_strong_graph<R: Rng>(n: usize, chords: usize, rng: &mut R) -> NetworkGraph {
    let mut g = NetworkGraph::new(n, usize::MAX);
    for i in 0..n {
        g.add_edge(i, (i + 1) % n, unit_link()).unwrap();
    }
    for _ in 0..chords {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b {
            g.add_edge(a, b, unit_link()).unwrap();
        }
    }
    g
}

#[test]
fn hop_metrics_match_floyd_warshall() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let n = rng.random_range(2..=8);
        let g = random_strong_graph(n, rng.random_range(0..12), &mut rng);
        let edges = edge_list(&g);
        assert_eq!(Some(max_shortest_path(&g).unwrap()), fw_diameter(n, &edges));
        let loops = min_loops(&g).unwrap();
        for v in 0..n {
            assert_eq!(Some(loops[v]), fw_min_loop(n, &edges, v));
        }
    }
}

#[test]
fn disconnected_graph_is_rejected() {
    let mut g = NetworkGraph::new(3, 5);
    g.add_edge(0, 1, unit_link()).unwrap();
    g.add_edge(1, 0, unit_link()).unwrap();
    assert!(matches!(max_shortest_path(&g), Err(Error::NotStronglyConnected)));
}

#[test]
fn ring_is_a_feasible_hamiltonian_cycle_or_none_exists() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut built = 0;
    for _ in 0..300 {
        let n = rng.random_range(3..=6);
        let sets = random_sets(n, 0.45, &mut rng);
        let cycles = hamiltonian_cycles(&sets);
        let fs = FeasibleSets::from_sets(sets.clone());
        match construct_ring(&fs, &mut rng) {
            Ok(ring) => {
                built += 1;
                assert_eq!(ring.num_edges(), n);
                for (a, b, _) in ring.edges() {
                    assert!(sets[a].contains(&b));
                }
                for v in 0..n {
                    assert_eq!(ring.in_degree(v), 1);
                    assert_eq!(ring.out_degree(v), 1);
                }
                assert!(ring.is_strongly_connected());
                assert_eq!(max_shortest_path(&ring).unwrap(), n - 1);
                // Follow successors from 0 and find the same cycle in the enumeration.
                let mut order = vec![0];
                while order.len() < n {
                    let last = *order.last().unwrap();
                    order.push(*ring.out_neighbors(last).iter().next().unwrap());
                }
                assert!(cycles.contains(&order));
            }
            Err(Error::NoFeasibleTopology(_)) => assert!(cycles.is_empty()),
            Err(e) => panic!("unexpected {e}"),
        }
    }
    assert!(built > 20);
}

#[test]
fn ring_requires_covering_sets() {
    let mut sets: Vec<BTreeSet<usize>> = complete(4).feasible;
    sets[2].clear();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(matches!(construct_ring(&FeasibleSets::from_sets(sets), &mut rng), Err(Error::NoFeasibleTopology(_))));
    assert!(matches!(construct_ring(&complete(1), &mut rng), Err(Error::DegenerateFleet(1))));
}

/// Smallest `l_max` over every ring-containing edge subset where each node keeps at most `quota` out-edges.
fn brute_force_best_l_max(n: usize, quota: usize) -> usize {
    let chords: Vec<(usize, usize)> =
        (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).filter(|&(a, b)| a != b && b != (a + 1) % n).collect();
    let mut best = n - 1;
    for mask in 0u32..(1 << chords.len()) {
        let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        edges.extend(chords.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| *e));
        let over = (0..n).any(|v| edges.iter().filter(|e| e.0 == v).count() > quota);
        if !over {
            if let Some(d) = fw_diameter(n, &edges) {
                best = best.min(d);
            }
        }
    }
    best
}

#[test]
fn pruning_reaches_the_brute_force_optimum_on_five_nodes() {
    let sets = complete(5);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ring = construct_ring(&sets, &mut rng).unwrap();
    let optimum = brute_force_best_l_max(5, 3);
    let pruned = augment_and_prune(&ring, &sets, 15).unwrap();
    assert!(optimum < 4);
    assert_eq!(max_shortest_path(&pruned).unwrap(), optimum);
}

#[test]
fn pruning_without_headroom_is_identity() {
    let sets = complete(6);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ring = construct_ring(&sets, &mut rng).unwrap();
    assert_eq!(augment_and_prune(&ring, &sets, 6).unwrap(), ring);
    assert!(matches!(augment_and_prune(&ring, &sets, 5), Err(Error::InsufficientResourceBlocks { .. })));
}

#[test]
fn edge_csv_round_trips() {
    let sets = complete(5);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let ring = construct_ring(&sets, &mut rng).unwrap();
    let g = augment_and_prune(&ring, &sets, 12).unwrap();
    let mut buf = Vec::new();
    write_edges_csv(&g, &mut buf).unwrap();
    assert!(String::from_utf8_lossy(&buf).starts_with("src,dst,tx_power_dbm,path_loss_db,rate_bps"));
    let back = read_edges_csv(buf.as_slice(), 5).unwrap();
    assert_eq!(edge_list(&back), edge_list(&g));
}

fn link_config(n: usize) -> LinkConfig {
    LinkConfig {
        max_power_dbm: 40.0,
        link_tx_power_dbm: 30.0,
        noise_dbm_per_hz: -174.0,
        bandwidth_hz: 2e6,
        snr_threshold_db: 12.0,
        share_deadline_s: 0.01,
        frequency_hz: 30e9,
        pathloss_exponent: 2.0,
        eta: 0.5,
        rho: 11.0,
        dataset_sizes: vec![2000; n],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn augmented_topologies_keep_their_invariants(seed in 0u64..10_000, n in 3usize..=7, extra in 0usize..=14) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let positions: Vec<[f64; 3]> = (0..n)
            .map(|_| [rng.random_range(0.0..400.0), rng.random_range(0.0..400.0), 100.0])
            .collect();
        let cfg = link_config(n);
        let sets = FeasibleSets::compute(&positions, &cfg).unwrap();
        let Ok(ring) = construct_ring(&sets, &mut rng) else { return Ok(()); };
        let budget = n + extra;
        let g = augment_and_prune(&ring, &sets, budget).unwrap();
        prop_assert!(g.num_edges() <= budget);
        prop_assert!(g.is_strongly_connected());
        prop_assert!(max_shortest_path(&g).unwrap() <= n - 1);
        for (a, b, link) in g.edges() {
            prop_assert!(sets.budgeted[a].contains(&b));
            let independent = cfg.budget(positions[a], positions[b]).unwrap();
            prop_assert!(independent.meets_threshold());
            prop_assert!((link.path_loss_db - independent.path_loss_db).abs() < 1e-9);
        }
        for v in 0..n {
            let used: f64 = g.out_neighbors(v).iter().map(|&j| dbm_to_watts(g.link(v, j).unwrap().tx_power_dbm)).sum();
            prop_assert!(used <= dbm_to_watts(cfg.max_power_dbm) * (1.0 + 1e-9));
        }
    }

    #[test]
    fn larger_budgets_never_lengthen_paths(seed in 0u64..10_000) {
        let sets = complete(6);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ring = construct_ring(&sets, &mut rng).unwrap();
        for b in 6..=30 {
            let g = augment_and_prune(&ring, &sets, b).unwrap();
            prop_assert!(max_shortest_path(&g).unwrap() <= 5);
        }
    }
}
