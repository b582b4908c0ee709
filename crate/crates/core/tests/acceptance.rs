//! Acceptance suite: one pass/fail line per criterion, non-zero exit when any fails.

mod common;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use common::{hamiltonian_cycles, random_sets, tiny_config};
use fleetgan::config::{load_config, ScenarioConfig};
use fleetgan::convergence::{
    communication_load, convergence_curve, iterations_for_target, share_quota, ConvergenceParams, GammaSchedule,
};
use fleetgan::experiment::{
    beam_selection_rate, convergence_params, experiment_fig3, experiment_fig4, experiment_jsd, experiment_overhead,
    experiment_rate, simulate, topology_for, worker_pool, TrainingSetup,
};
use fleetgan::learner::GenLoss;
use fleetgan::protocol::{node_frames, propagation_oracle, run_round, SimulationState};
use fleetgan::topology::{construct_ring, max_shortest_path, FeasibleSets};
use fleetgan::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::ThreadPool;

type Outcome = Result<String, String>;

fn config(name: &str) -> ScenarioConfig {
    load_config(&PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)).expect("shipped config")
}

fn complete_sets(n: usize) -> FeasibleSets {
    FeasibleSets::from_sets((0..n).map(|g| (0..n).filter(|&j| j != g).collect()).collect())
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn oracle_agreement() -> Outcome {
    let trials = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for g in 3..=5 {
        let ring = construct_ring(&complete_sets(g), &mut rng).map_err(|e| e.to_string())?;
        let params = ConvergenceParams::from_graph(&ring, 0.5, 0.01, GammaSchedule::Unit, 0.99, 100)
            .map_err(|e| e.to_string())?;
        let oracle = propagation_oracle(&ring, 0.5, 0.01, trials, 40, &mut rng);
        let curve = convergence_curve(&params, 40);
        for k in 0..=40 {
            let se = oracle.std_errors[k].max(1.0 / trials as f64);
            let z = (curve[k] - oracle.cdf[k]).abs() / se;
            worst = worst.max(z);
        }
    }
    ensure(worst <= 3.0, format!("largest deviation {worst:.2} standard errors over G = 3..5"))
}

fn zero_region() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let configs = 2000;
    let mut violations = 0;
    for _ in 0..configs {
        let l_max = rng.random_range(1..=20);
        let gamma = if rng.random_bool(0.5) {
            GammaSchedule::Unit
        } else {
            GammaSchedule::Linear { slope: rng.random_range(0.0..3.0), cap: rng.random_range(1.0..8.0) }
        };
        let p = ConvergenceParams {
            l_max,
            l_loop_min: l_max + rng.random_range(1..=5),
            eta: rng.random_range(0.01..=1.0),
            in_degree: rng.random_range(1..=10),
            training_error: rng.random_range(0.0..0.99),
            gamma,
            target_probability: 0.99,
            iteration_cap: 200,
        };
        let curve = convergence_curve(&p, l_max + 5);
        if curve[..l_max as usize].iter().any(|&v| v != 0.0) || curve[l_max as usize] <= 0.0 {
            violations += 1;
        }
    }
    ensure(violations == 0, format!("{configs} configurations, {violations} nonzero below l_max"))
}

fn fig3_trend() -> Outcome {
    let cfg = config("reference.toml");
    let mut shown = String::new();
    for seed in 0..10 {
        let mut counts = Vec::new();
        for b in [5, 10, 15] {
            let graph = topology_for(&cfg, seed, 5, b).map_err(|e| e.to_string())?;
            let params = convergence_params(&cfg, &graph).map_err(|e| e.to_string())?;
            counts.push(iterations_for_target(&params).map_err(|e| format!("seed {seed}, blocks {b}: {e}"))?);
        }
        if seed == 0 {
            shown = format!("{counts:?}");
        }
        if counts.windows(2).any(|w| w[1] > w[0]) {
            return Err(format!("seed {seed}: iterations to 0.99 {counts:?} for blocks 5, 10, 15"));
        }
        experiment_fig3(&cfg, seed, &[5, 10, 15]).map_err(|e| e.to_string())?;
    }
    Ok(format!("10 seeds, iterations to 0.99 at blocks 5/10/15 = {shown} (seed 0)"))
}

fn fig4_trend() -> Outcome {
    let cfg = config("reference.toml");
    for seed in 0..10 {
        let csv = experiment_fig4(&cfg, seed, &[5, 10, 15], 15).map_err(|e| e.to_string())?;
        let mut curves: Vec<Vec<f64>> = vec![Vec::new(); 3];
        for line in csv.lines().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            if cols[3] != "ok" {
                return Err(format!("seed {seed}: fleet size {} has no topology ({})", cols[0], cols[3]));
            }
            let idx = [5, 10, 15].iter().position(|&g| cols[0] == g.to_string()).expect("known size");
            curves[idx].push(cols[2].parse().expect("probability"));
        }
        for i in 0..curves[0].len() {
            if curves[0][i] + 1e-12 < curves[1][i] || curves[1][i] + 1e-12 < curves[2][i] {
                return Err(format!("seed {seed}, iteration {i}: {} {} {}", curves[0][i], curves[1][i], curves[2][i]));
            }
        }
    }
    Ok("10 seeds, curves nonincreasing in G at every iteration".into())
}

fn ring_structure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    while checked < 100 {
        let sets = random_sets(5, 0.5, &mut rng);
        let cycles = hamiltonian_cycles(&sets);
        if cycles.is_empty() {
            continue;
        }
        checked += 1;
        let ring = construct_ring(&FeasibleSets::from_sets(sets), &mut rng).map_err(|e| e.to_string())?;
        let degrees_ok = (0..5).all(|v| ring.in_degree(v) == 1 && ring.out_degree(v) == 1);
        let mut order = vec![0];
        while order.len() < 5 {
            order.push(*ring.out_neighbors(*order.last().unwrap()).iter().next().unwrap());
        }
        let ok = degrees_ok
            && ring.num_edges() == 5
            && ring.is_strongly_connected()
            && max_shortest_path(&ring).ok() == Some(4)
            && cycles.contains(&order);
        if !ok {
            return Err(format!("scenario {checked}: ring {order:?} fails a structural check"));
        }
    }
    Ok("100 feasible scenarios, every ring valid and enumerated".into())
}

fn feasibility_gate() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let scenarios = 400;
    for i in 0..scenarios {
        let n = rng.random_range(3..=7);
        let mut sets: Vec<BTreeSet<usize>> = random_sets(n, 0.7, &mut rng);
        let victim = rng.random_range(0..n);
        if i % 2 == 0 {
            sets[victim].clear();
        } else {
            sets.iter_mut().for_each(|s| {
                s.remove(&victim);
            });
        }
        match construct_ring(&FeasibleSets::from_sets(sets), &mut rng) {
            Err(Error::NoFeasibleTopology(_)) => {}
            other => return Err(format!("scenario {i}: expected NoFeasibleTopology, got {other:?}")),
        }
    }
    Ok(format!("{scenarios} infeasible scenarios refused"))
}

fn gradients() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        worst = worst.max(common::disc_gradient_error(&mut rng));
        worst = worst.max(common::gen_gradient_error(&mut rng, GenLoss::NonSaturating));
        worst = worst.max(common::gen_gradient_error(&mut rng, GenLoss::Minimax));
    }
    ensure(worst < 1e-4, format!("worst relative error {worst:.2e}"))
}

/// Final JSD of each scheme per seed, and the distributed runs kept for the rate check.
struct TrainingResults {
    jsd: Vec<[f64; 3]>,
    rates: Vec<(f64, f64)>,
}

fn train_desk(pool: &ThreadPool) -> Result<TrainingResults, String> {
    let cfg = config("desk.toml");
    let mut out = TrainingResults { jsd: Vec::new(), rates: Vec::new() };
    for seed in 1..=3 {
        let setup = TrainingSetup::new(&cfg, seed).map_err(|e| e.to_string())?;
        let mut row = [0.0; 3];
        for (i, scheme) in ["centralized", "distributed", "standalone"].iter().enumerate() {
            let run = setup.run(scheme, cfg.learning.rounds, pool).map_err(|e| e.to_string())?;
            row[i] = run.final_jsd().ok_or("no JSD evaluation")?;
            if *scheme == "distributed" {
                let r = beam_selection_rate(&setup, &run.state).map_err(|e| e.to_string())?;
                out.rates.push((r.learned_bps, r.genie_bps));
            }
        }
        out.jsd.push(row);
    }
    Ok(out)
}

fn jsd_ordering(results: &Result<TrainingResults, String>) -> Outcome {
    let r = results.as_ref().map_err(Clone::clone)?;
    let n = r.jsd.len() as f64;
    let mean = |i: usize| r.jsd.iter().map(|row| row[i]).sum::<f64>() / n;
    let (c, d, s) = (mean(0), mean(1), mean(2));
    let per_seed: Vec<String> = r.jsd.iter().map(|x| format!("{:.3}/{:.3}/{:.3}", x[0], x[1], x[2])).collect();
    ensure(
        c <= d && d < s && d < 0.8 * s,
        format!("seed-mean JSD centralized {c:.3}, distributed {d:.3}, standalone {s:.3}; per seed c/d/s {}", per_seed.join(", ")),
    )
}

fn rate_ratio(results: &Result<TrainingResults, String>) -> Outcome {
    let r = results.as_ref().map_err(Clone::clone)?;
    let floor = config("desk.toml").eval.rate_floor;
    let ratios: Vec<f64> = r.rates.iter().map(|(l, g)| l / g).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    ensure(mean >= floor, format!("learned/genie rate {mean:.3} (per seed {ratios:.3?}), floor {floor}"))
}

fn load_accounting(pool: &ThreadPool) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for case in 0..20 {
        let g = rng.random_range(3..=5);
        let blocks = rng.random_range(g..=2 * g);
        let eta = f64::from(rng.random_range(1..=20)) / 20.0;
        let h = 20 * rng.random_range(1..=5);
        let rounds = rng.random_range(1..=3);
        let mut cfg = tiny_config(g, blocks, h, eta);
        cfg.learning.learner.local_steps = 1;
        let setup = TrainingSetup::new(&cfg, case).map_err(|e| e.to_string())?;
        let frames = node_frames(cfg.learning.frame, &setup.datasets, cfg.radio.directions).map_err(|e| e.to_string())?;
        let mut state = SimulationState::new(&setup.datasets, &frames, &setup.graph, &setup.protocol, case)
            .map_err(|e| e.to_string())?;
        for _ in 0..rounds {
            run_round(&mut state, &setup.graph, &setup.protocol, pool).map_err(|e| e.to_string())?;
        }
        let sizes: Vec<usize> = setup.datasets.iter().map(Vec::len).collect();
        let degrees: Vec<usize> = (0..g).map(|n| setup.graph.out_degree(n)).collect();
        let closed = communication_load(rounds as u64, eta, &sizes, cfg.learning.rho, &degrees);
        let counted = state.shared_samples * cfg.learning.rho as u64;
        let quotas_integral = sizes.iter().all(|&s| share_quota(eta, s) as f64 == eta * s as f64);
        if !quotas_integral || closed.round() as u64 != counted || (closed - counted as f64).abs() > 1e-6 {
            return Err(format!("case {case}: counted {counted}, closed form {closed}"));
        }
    }

    // Same ring and iteration count, different budgets: the counted volume must not move.
    let cfg = tiny_config(4, 4, 40, 0.5);
    let setup = TrainingSetup::new(&cfg, 0).map_err(|e| e.to_string())?;
    let frames = node_frames(cfg.learning.frame, &setup.datasets, 3).map_err(|e| e.to_string())?;
    let mut volumes = Vec::new();
    for blocks in [4, 8, 12] {
        let mut graph = setup.graph.clone();
        graph.set_resource_blocks(blocks).map_err(|e| e.to_string())?;
        let mut state =
            SimulationState::new(&setup.datasets, &frames, &graph, &setup.protocol, 1).map_err(|e| e.to_string())?;
        for _ in 0..3 {
            run_round(&mut state, &graph, &setup.protocol, pool).map_err(|e| e.to_string())?;
        }
        volumes.push(state.shared_samples);
    }
    let overhead = experiment_overhead(&config("reference.toml"), 0, &[5, 10, 15]).map_err(|e| e.to_string())?;
    let ring_loads: BTreeSet<&str> = overhead.lines().skip(1).filter_map(|l| l.split(',').nth(3)).collect();
    ensure(
        volumes.windows(2).all(|w| w[0] == w[1]) && ring_loads.len() == 1,
        format!("20 configs exact; volume at blocks 4/8/12 = {volumes:?}; ring load column {ring_loads:?}"),
    )
}

fn determinism() -> Outcome {
    let reference = config("reference.toml");
    let tiny = tiny_config(3, 4, 45, 0.5);
    let run_all = |workers: usize| -> Result<Vec<(String, Vec<u8>)>, String> {
        let pool = worker_pool(workers).map_err(|e| e.to_string())?;
        let e = |r: fleetgan::Result<String>| r.map(String::into_bytes).map_err(|e| e.to_string());
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        simulate(&tiny, 5, dir.path(), &pool).map_err(|e| e.to_string())?;
        let metrics = std::fs::read(dir.path().join("metrics.csv")).map_err(|e| e.to_string())?;
        let schemes = ["distributed", "standalone", "centralized", "parameter_averaging"];
        Ok(vec![
            ("fig3".into(), e(experiment_fig3(&reference, 3, &[5, 10, 15]))?),
            ("fig4".into(), e(experiment_fig4(&reference, 3, &[5, 10, 15], 15))?),
            ("overhead".into(), e(experiment_overhead(&reference, 3, &[5, 10, 15]))?),
            ("jsd".into(), e(experiment_jsd(&tiny, 5, &schemes, &pool, None))?),
            ("rate".into(), e(experiment_rate(&tiny, 5, &[3, 4], &pool, None))?),
            ("metrics".into(), metrics),
        ])
    };
    let a = run_all(1)?;
    let b = run_all(1)?;
    let c = run_all(4)?;
    let differing: Vec<&str> =
        a.iter().zip(&b).zip(&c).filter(|((x, y), z)| x.1 != y.1 || x.1 != z.1).map(|((x, _), _)| x.0.as_str()).collect();
    ensure(
        differing.is_empty(),
        format!("{} tables compared across reruns and 1 vs 4 workers; differing: {differing:?}", a.len()),
    )
}

fn main() -> ExitCode {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let pool = worker_pool(workers).expect("thread pool");
    let mut failures = 0;
    let mut report = |id: &str, name: &str, start: Instant, outcome: Outcome| {
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {id} {name}: {detail} ({secs:.1} s)"),
            Err(detail) => {
                failures += 1;
                println!("[FAIL] {id} {name}: {detail} ({secs:.1} s)");
            }
        }
    };

    let t = Instant::now();
    report("AC1", "closed form vs Monte Carlo propagation", t, oracle_agreement());
    let t = Instant::now();
    report("AC2", "zero probability below l_max", t, zero_region());
    let t = Instant::now();
    report("AC3", "convergence speeds up with more resource blocks", t, fig3_trend());
    let t = Instant::now();
    report("AC4", "convergence slows with fleet size", t, fig4_trend());
    let t = Instant::now();
    report("AC5", "ring structure", t, ring_structure());
    let t = Instant::now();
    report("AC6", "infeasible scenarios refused", t, feasibility_gate());
    let t = Instant::now();
    report("AC7", "analytic gradients", t, gradients());
    let t = Instant::now();
    let training = train_desk(&pool);
    report("AC8", "JSD ordering of training schemes", t, jsd_ordering(&training));
    let t = Instant::now();
    report("AC9", "communication load accounting", t, load_accounting(&pool));
    let t = Instant::now();
    report("AC10", "beam-selection rate vs genie", t, rate_ratio(&training));
    let t = Instant::now();
    report("AC11", "determinism across reruns and worker counts", t, determinism());

    if failures == 0 {
        println!("acceptance: all 11 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} of 11 criteria failed");
        ExitCode::FAILURE
    }
}
