mod common;

use fleetgan::convergence::{communication_load, share_quota};
use fleetgan::experiment::{worker_pool, TrainingSetup};
use fleetgan::protocol::{
    average_parameters, node_frames, run_round, SchemeContext, SchemeRegistry, SimulationState,
};
use fleetgan::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn context<'a>(setup: &'a TrainingSetup, pool: &'a rayon::ThreadPool, rounds: usize) -> SchemeContext<'a> {
    let l = &setup.config().learning;
    SchemeContext {
        datasets: &setup.datasets,
        graph: &setup.graph,
        evaluator: &setup.evaluator,
        protocol: &setup.protocol,
        frame: l.frame,
        rounds,
        jsd_every: 1,
        averaging_period: 1,
        seed: 11,
        pool,
    }
}

#[test]
fn counted_load_matches_the_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let pool = worker_pool(1).unwrap();
    for case in 0..6 {
        let g = rng.random_range(3..=5);
        let blocks = rng.random_range(g..=2 * g);
        let h = rng.random_range(20..120);
        let eta = rng.random_range(0.05..1.0);
        let rounds = rng.random_range(1..4);
        let mut cfg = common::tiny_config(g, blocks, h, eta);
        cfg.learning.learner.local_steps = 1;
        let setup = TrainingSetup::new(&cfg, case).unwrap();
        let frames = node_frames(cfg.learning.frame, &setup.datasets, cfg.radio.directions).unwrap();
        let mut state = SimulationState::new(&setup.datasets, &frames, &setup.graph, &setup.protocol, 5).unwrap();
        for _ in 0..rounds {
            run_round(&mut state, &setup.graph, &setup.protocol, &pool).unwrap();
        }
        let quotas: Vec<usize> = setup.datasets.iter().map(|d| share_quota(eta, d.len())).collect();
        let degrees: Vec<usize> = (0..g).map(|n| setup.graph.out_degree(n)).collect();
        let expected: usize = quotas.iter().zip(&degrees).map(|(q, d)| q * d).sum::<usize>() * rounds;
        assert_eq!(state.shared_samples, expected as u64);
        let closed = communication_load(rounds as u64, 1.0, &quotas, cfg.learning.rho, &degrees);
        assert_eq!(state.load(cfg.learning.rho), closed);
        assert_eq!(state.last_round_records().len(), g);
    }
}

#[test]
fn integral_sharing_matches_the_literal_formula() {
    let pool = worker_pool(1).unwrap();
    let cfg = common::tiny_config(4, 6, 40, 0.25);
    let setup = TrainingSetup::new(&cfg, 3).unwrap();
    let frames = node_frames(cfg.learning.frame, &setup.datasets, 3).unwrap();
    let mut state = SimulationState::new(&setup.datasets, &frames, &setup.graph, &setup.protocol, 1).unwrap();
    for _ in 0..2 {
        run_round(&mut state, &setup.graph, &setup.protocol, &pool).unwrap();
    }
    let degrees: Vec<usize> = (0..4).map(|n| setup.graph.out_degree(n)).collect();
    let literal = communication_load(2, 0.25, &[40; 4], cfg.learning.rho, &degrees);
    assert_eq!(state.load(cfg.learning.rho), literal);
}

#[test]
fn worker_count_does_not_change_results() {
    let cfg = common::tiny_config(4, 5, 60, 0.5);
    let setup = TrainingSetup::new(&cfg, 8).unwrap();
    let one = setup.run("distributed", 3, &worker_pool(1).unwrap()).unwrap();
    let four = setup.run("distributed", 3, &worker_pool(4).unwrap()).unwrap();
    assert_eq!(one.jsd_trace, four.jsd_trace);
    for (a, b) in one.state.nodes.iter().zip(&four.state.nodes) {
        assert_eq!(a.learner.generator, b.learner.generator);
        assert_eq!(a.learner.discriminator, b.learner.discriminator);
    }
    assert_eq!(one.state.shared_samples, four.state.shared_samples);
}

#[test]
fn standalone_is_distributed_without_sharing() {
    let cfg = common::tiny_config(3, 3, 50, 0.5);
    let mut setup = TrainingSetup::new(&cfg, 2).unwrap();
    setup.protocol.eta = 0.0;
    let pool = worker_pool(1).unwrap();
    let ctx = context(&setup, &pool, 3);
    let reg = SchemeRegistry::standard();
    let a = reg.get("distributed").unwrap().run(&ctx).unwrap();
    let b = reg.get("standalone").unwrap().run(&ctx).unwrap();
    assert_eq!(a.jsd_trace, b.jsd_trace);
    assert_eq!(a.state.shared_samples, 0);
    for (x, y) in a.state.nodes.iter().zip(&b.state.nodes) {
        assert_eq!(x.learner.generator, y.learner.generator);
    }
}

#[test]
fn averaging_every_round_keeps_nodes_identical() {
    let cfg = common::tiny_config(3, 3, 50, 0.5);
    let mut setup = TrainingSetup::new(&cfg, 4).unwrap();
    setup.protocol.shared_init = true;
    let pool = worker_pool(1).unwrap();
    let run = SchemeRegistry::standard().get("parameter_averaging").unwrap().run(&context(&setup, &pool, 2)).unwrap();
    let first = &run.state.nodes[0].learner;
    for n in &run.state.nodes[1..] {
        assert_eq!(n.learner.generator, first.generator);
        assert_eq!(n.learner.discriminator, first.discriminator);
        assert_eq!(n.learner.generator_avg, first.generator_avg);
    }
    assert_eq!(run.state.shared_samples, 0);
}

#[test]
fn averaging_takes_the_elementwise_mean() {
    let cfg = common::tiny_config(3, 3, 30, 0.5);
    let setup = TrainingSetup::new(&cfg, 6).unwrap();
    let frames = node_frames(cfg.learning.frame, &setup.datasets, 3).unwrap();
    let mut state = SimulationState::new(&setup.datasets, &frames, &setup.graph, &setup.protocol, 1).unwrap();
    let expected: Vec<f64> = (0..state.nodes[0].learner.generator.net.num_params())
        .map(|i| state.nodes.iter().map(|n| n.learner.generator.net.params()[i]).sum::<f64>() / 3.0)
        .collect();
    average_parameters(&mut state);
    for n in &state.nodes {
        for (a, b) in n.learner.generator.net.params().iter().zip(&expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}

#[test]
fn registry_lists_and_rejects_names() {
    let reg = SchemeRegistry::standard();
    assert_eq!(reg.names(), vec!["centralized", "distributed", "parameter_averaging", "standalone"]);
    assert!(matches!(reg.get("gossip"), Err(Error::UnknownBaseline(_))));
}

#[test]
fn centralized_pools_every_dataset() {
    let cfg = common::tiny_config(3, 3, 40, 0.5);
    let setup = TrainingSetup::new(&cfg, 1).unwrap();
    let run = setup.run("centralized", 1, &worker_pool(1).unwrap()).unwrap();
    assert_eq!(run.state.nodes.len(), 1);
    assert_eq!(run.state.nodes[0].dataset_size, 3 * 40);
    assert_eq!(run.jsd_trace.len(), 1);
}
