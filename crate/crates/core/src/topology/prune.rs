//! Spend spare resource blocks on extra sharing edges, then prune each node
//! back to its out-degree quota while keeping the longest shortest path low.

use super::feasible::FeasibleSets;
use super::graph::{max_shortest_path, min_loops, NetworkGraph};
use super::link::Link;
use crate::error::{Error, Result};

/// Grow a ring with feasible chords and prune to at most `budget` edges.
///
/// Ring edges are never removed, so the result stays strongly connected and
/// its `l_max` never exceeds the ring's `G - 1`. Each node's quota is
/// `budget / G`; leftover blocks go to the nodes whose next chord has the
/// highest rate. Pruning removes the chord whose deletion raises `l_max`
/// least, then the one with the lowest rate. Chords left redundant after
/// that are dropped as well, so the result may use fewer than `budget` edges.
pub fn augment_and_prune(ring: &NetworkGraph, sets: &FeasibleSets, budget: usize) -> Result<NetworkGraph> {
    let n = ring.num_nodes();
    if budget < n {
        return Err(Error::InsufficientResourceBlocks { blocks: budget, nodes: n });
    }
    if sets.len() != n {
        return Err(Error::ShapeMismatch(format!("{} feasible sets for a {n}-node graph", sets.len())));
    }
    if !ring.is_strongly_connected() {
        return Err(Error::NotStronglyConnected);
    }

    let is_ring = |a: usize, b: usize| ring.has_edge(a, b);
    let mut full = ring.clone();
    full.set_resource_blocks(usize::MAX)?;
    for (g, targets) in sets.budgeted.iter().enumerate() {
        for &j in targets {
            if !is_ring(g, j) {
                full.add_edge(g, j, *sets.link(g, j).expect("budgeted pair has a link"))?;
            }
        }
    }

    let quotas = out_degree_quotas(&full, &is_ring, budget);

    loop {
        let over: Vec<usize> = (0..n).filter(|&g| full.out_degree(g) > quotas[g]).collect();
        if over.is_empty() {
            break;
        }
        let mut best: Option<(usize, f64, (usize, usize))> = None;
        for &g in &over {
            for j in full.out_neighbors(g) {
                if is_ring(g, j) {
                    continue;
                }
                let link = full.remove_edge(g, j).expect("edge exists");
                let l_max = max_shortest_path(&full)?;
                full.add_edge(g, j, link)?;
                let key = (l_max, link.rate_bps, (g, j));
                let better = match &best {
                    None => true,
                    Some(b) => key.0.cmp(&b.0).then(key.1.total_cmp(&b.1)).then(key.2.cmp(&b.2)).is_lt(),
                };
                if better {
                    best = Some(key);
                }
            }
        }
        let (_, _, (g, j)) = best.expect("an over-quota node always has a chord");
        full.remove_edge(g, j);
    }
    drop_redundant_chords(&mut full, &is_ring)?;
    full.set_resource_blocks(budget)?;
    Ok(full)
}

/// Remove chords that shorten neither `l_max` nor any shortest loop. Each
/// removal can only lower in-degrees, so the convergence rate never drops.
/// Chords into the busiest receiver go first, then the slowest.
fn drop_redundant_chords(graph: &mut NetworkGraph, is_ring: &dyn Fn(usize, usize) -> bool) -> Result<()> {
    let shape = |g: &NetworkGraph| -> Result<(usize, usize)> {
        Ok((max_shortest_path(g)?, min_loops(g)?.into_iter().min().unwrap_or(0)))
    };
    let target = shape(graph)?;
    loop {
        let mut best: Option<(usize, f64, (usize, usize))> = None;
        let chords: Vec<(usize, usize)> = graph.edges().map(|(a, b, _)| (a, b)).filter(|&(a, b)| !is_ring(a, b)).collect();
        for (g, j) in chords {
            let link = graph.remove_edge(g, j).expect("edge exists");
            let unchanged = shape(graph)? == target;
            graph.add_edge(g, j, link)?;
            if !unchanged {
                continue;
            }
            let key = (usize::MAX - graph.in_degree(j), link.rate_bps, (g, j));
            let better = match &best {
                None => true,
                Some(b) => key.0.cmp(&b.0).then(key.1.total_cmp(&b.1)).then(key.2.cmp(&b.2)).is_lt(),
            };
            if better {
                best = Some(key);
            }
        }
        match best {
            Some((_, _, (g, j))) => {
                graph.remove_edge(g, j);
            }
            None => return Ok(()),
        }
    }
}

fn out_degree_quotas(full: &NetworkGraph, is_ring: &dyn Fn(usize, usize) -> bool, budget: usize) -> Vec<usize> {
    let n = full.num_nodes();
    let base = budget / n;
    // Chords per node, fastest first.
    let chords: Vec<Vec<Link>> = (0..n)
        .map(|g| {
            let mut c: Vec<Link> = full
                .out_neighbors(g)
                .into_iter()
                .filter(|&j| !is_ring(g, j))
                .map(|j| *full.link(g, j).expect("edge exists"))
                .collect();
            c.sort_by(|a, b| b.rate_bps.total_cmp(&a.rate_bps));
            c
        })
        .collect();
    let mut quotas: Vec<usize> = (0..n).map(|g| base.min(full.out_degree(g))).collect();
    let mut leftover = budget - quotas.iter().sum::<usize>();
    while leftover > 0 {
        // Quota q covers the ring edge plus q - 1 chords; the next chord is chords[q - 1].
        let next = (0..n)
            .filter_map(|g| chords[g].get(quotas[g] - 1).map(|l| (g, l.rate_bps)))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
        match next {
            Some((g, _)) => {
                quotas[g] += 1;
                leftover -= 1;
            }
            None => break,
        }
    }
    quotas
}
