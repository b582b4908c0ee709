use rand::Rng;

use crate::topology::NetworkGraph;

/// Empirical first-passage CDF with per-iteration standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleEstimate {
    /// `cdf[k]`: fraction of trials whose tagged sample arrived by iteration `k`.
    pub cdf: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub trials: usize,
    pub l_max: usize,
    pub in_degree: usize,
}

fn bfs_eccentricity(adj: &[Vec<usize>], src: usize) -> Option<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[src] = 0;
    let mut frontier = vec![src];
    let mut depth = 0;
    while !frontier.is_empty() {
        depth += 1;
        let mut next = Vec::new();
        for &x in &frontier {
            for &y in &adj[x] {
                if dist[y] == usize::MAX {
                    dist[y] = depth;
                    next.push(y);
                }
            }
        }
        frontier = next;
    }
    dist.iter().copied().try_fold(0, |m, d| (d != usize::MAX).then_some(m.max(d)))
}

/// Monte Carlo estimate of the probability that a tagged unit of CSI has
/// crossed the graph's longest shortest path by each iteration.
///
/// Every iteration `k ≥ ℓ_max` a fresh copy attempts the trip: it survives
/// each of the `ℓ_max` hops with probability `(1 − T)η` and each of the
/// `k − 1` rounds of inbox turnover with probability `1/(1 + Cη)`, where `C`
/// is the largest in-degree. The first success ends the trial.
pub fn propagation_oracle<R: Rng + ?Sized>(
    graph: &NetworkGraph,
    eta: f64,
    training_error: f64,
    num_trials: usize,
    max_iterations: usize,
    rng: &mut R,
) -> OracleEstimate {
    let n = graph.num_nodes();
    let mut adj = vec![Vec::new(); n];
    let mut in_deg = vec![0usize; n];
    for (a, b, _) in graph.edges() {
        adj[a].push(b);
        in_deg[b] += 1;
    }
    let l_max = (0..n).map(|s| bfs_eccentricity(&adj, s).unwrap_or(usize::MAX)).max().unwrap_or(0);
    let c = in_deg.iter().copied().max().unwrap_or(0);
    let hop = (1.0 - training_error) * eta;
    let keep = 1.0 / (1.0 + c as f64 * eta);

    let mut arrivals = vec![0usize; max_iterations + 1];
    for _ in 0..num_trials {
        let first = (l_max.max(1)..=max_iterations).find(|&k| {
            (0..l_max).all(|_| rng.random::<f64>() < hop) && (1..k).all(|_| rng.random::<f64>() < keep)
        });
        if let Some(k) = first {
            arrivals[k] += 1;
        }
    }
    let mut cdf = Vec::with_capacity(max_iterations + 1);
    let mut running = 0usize;
    for a in arrivals {
        running += a;
        cdf.push(running as f64 / num_trials.max(1) as f64);
    }
    let std_errors = cdf.iter().map(|&p| (p * (1.0 - p) / num_trials.max(1) as f64).sqrt()).collect();
    OracleEstimate { cdf, std_errors, trials: num_trials, l_max, in_degree: c }
}
