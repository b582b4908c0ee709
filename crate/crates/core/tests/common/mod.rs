//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use fleetgan::learner::{disc_gradient, disc_objective, gen_gradient, gen_loss, CondSample, Discriminator, GenLoss, Generator};
use fleetgan::topology::NetworkGraph;
use rand::Rng;

/// All-pairs hop counts by Floyd–Warshall; `None` when unreachable.
pub fn floyd_warshall(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<Option<usize>>> {
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for &(a, b) in edges {
        d[a][b] = d[a][b].min(1);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d.into_iter().map(|r| r.into_iter().map(|x| (x < inf).then_some(x)).collect()).collect()
}

/// Largest finite shortest-path length, or `None` if some pair is unreachable.
pub fn fw_diameter(n: usize, edges: &[(usize, usize)]) -> Option<usize> {
    let d = floyd_warshall(n, edges);
    let mut best = 0;
    for row in &d {
        for x in row {
            best = best.max((*x)?);
        }
    }
    Some(best)
}

/// Shortest directed cycle through `v`, by brute-force search over path lengths.
pub fn fw_min_loop(n: usize, edges: &[(usize, usize)], v: usize) -> Option<usize> {
    let d = floyd_warshall(n, edges);
    edges.iter().filter(|&&(_, b)| b == v).filter_map(|&(a, _)| d[v][a].map(|x| x + 1)).min()
}

pub fn edge_list(g: &NetworkGraph) -> Vec<(usize, usize)> {
    g.edges().map(|(a, b, _)| (a, b)).collect()
}

/// Every permutation of `0..n` starting at node 0 that closes a cycle inside `allowed`.
pub fn hamiltonian_cycles(sets: &[BTreeSet<usize>]) -> Vec<Vec<usize>> {
    let n = sets.len();
    let mut out = Vec::new();
    let mut path = vec![0];
    let mut used = vec![false; n];
    used[0] = true;
    fn rec(sets: &[BTreeSet<usize>], path: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        let n = sets.len();
        let last = *path.last().unwrap();
        if path.len() == n {
            if sets[last].contains(&path[0]) {
                out.push(path.clone());
            }
            return;
        }
        for j in 0..n {
            if !used[j] && sets[last].contains(&j) {
                used[j] = true;
                path.push(j);
                rec(sets, path, used, out);
                path.pop();
                used[j] = false;
            }
        }
    }
    if n >= 2 {
        rec(sets, &mut path, &mut used, &mut out);
    }
    out
}

/// Random feasible-set family on `n` nodes with edge probability `p`.
pub fn random_sets<R: Rng>(n: usize, p: f64, rng: &mut R) -> Vec<BTreeSet<usize>> {
    (0..n).map(|g| (0..n).filter(|&j| j != g && rng.random::<f64>() < p).collect()).collect()
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, zero when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Central differences of `f` around `params`.
pub fn numeric_gradient(params: &mut [f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let x = params[i];
        params[i] = x + h;
        let up = f(params);
        params[i] = x - h;
        let down = f(params);
        params[i] = x;
        out.push((up - down) / (2.0 * h));
    }
    out
}

fn random_batch<R: Rng>(n: usize, dirs: usize, rng: &mut R) -> Vec<CondSample> {
    (0..n)
        .map(|_| CondSample { x: [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)], cond: rng.random_range(1..=dirs) })
        .collect()
}

/// Relative error between the analytic and numeric discriminator gradients for one random draw.
pub fn disc_gradient_error<R: Rng>(rng: &mut R) -> f64 {
    let dirs = 3;
    let disc = Discriminator::new(&[8, 8], dirs, rng).unwrap();
    let pos = random_batch(6, dirs, rng);
    let neg = random_batch(6, dirs, rng);
    let (_, analytic) = disc_gradient(&disc, &pos, &neg);
    let mut probe = disc.clone();
    let mut params = disc.net.params().to_vec();
    let numeric = numeric_gradient(&mut params, 1e-5, |p| {
        probe.net.params_mut().copy_from_slice(p);
        disc_objective(&probe, &pos, &neg)
    });
    relative_error(&analytic, &numeric)
}

/// Same for the generator under `loss`.
pub fn gen_gradient_error<R: Rng>(rng: &mut R, loss: GenLoss) -> f64 {
    let dirs = 3;
    let gen = Generator::new(3, &[8, 8], dirs, rng).unwrap();
    let disc = Discriminator::new(&[8, 8], dirs, rng).unwrap();
    let noise: Vec<Vec<f64>> = (0..6).map(|_| gen.sample_noise(rng)).collect();
    let conds: Vec<usize> = (0..6).map(|_| rng.random_range(1..=dirs)).collect();
    let (_, analytic) = gen_gradient(&gen, &disc, &noise, &conds, loss);
    let mut probe = gen.clone();
    let mut params = gen.net.params().to_vec();
    let numeric = numeric_gradient(&mut params, 1e-5, |p| {
        probe.net.params_mut().copy_from_slice(p);
        gen_loss(&probe, &disc, &noise, &conds, loss)
    });
    relative_error(&analytic, &numeric)
}

/// JSD through the entropy identity `H(M) − ½H(P) − ½H(Q)`.
pub fn jsd_entropy_form(p: &[f64], q: &[f64]) -> f64 {
    let h = |v: &mut dyn Iterator<Item = f64>| -> f64 { v.filter(|&x| x > 0.0).map(|x| -x * x.ln()).sum() };
    let m = h(&mut p.iter().zip(q).map(|(a, b)| 0.5 * (a + b)));
    m - 0.5 * h(&mut p.iter().copied()) - 0.5 * h(&mut q.iter().copied())
}

/// A fleet small enough to train in well under a second per round.
pub fn tiny_config(fleet_size: usize, blocks: usize, dataset_size: usize, eta: f64) -> fleetgan::config::ScenarioConfig {
    let mut c = fleetgan::config::ScenarioConfig::default();
    c.fleet.size = fleet_size;
    c.fleet.resource_blocks = blocks;
    c.fleet.dataset_size = dataset_size;
    c.radio.directions = 3;
    c.learning.eta = eta;
    c.learning.rounds = 3;
    c.learning.jsd_every = 1;
    c.learning.learner.gen_hidden = vec![8];
    c.learning.learner.disc_hidden = vec![8];
    c.learning.learner.batch_size = 16;
    c.learning.learner.local_steps = 2;
    c.eval.jsd_bins = 8;
    c.eval.jsd_samples = 200;
    c.eval.rate_test_points = 5;
    c.eval.rate_model_samples = 20;
    c
}
