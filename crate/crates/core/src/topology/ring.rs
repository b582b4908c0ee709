//! Directed Hamiltonian ring over the budgeted feasible sets.

use rand::seq::SliceRandom;
use rand::Rng;

use super::feasible::{check_necessary_condition, FeasibleSets};
use super::graph::NetworkGraph;
use crate::error::{Error, Result};

/// Backtracking steps allowed before giving up.
const SEARCH_BUDGET: u64 = 20_000_000;

/// Build a ring where every node has exactly one in- and one out-neighbor,
/// using only edges `g -> j` with `j` in the budgeted set of `g`.
///
/// Ties among valid cycles are broken by a seeded node priority.
pub fn construct_ring<R: Rng + ?Sized>(sets: &FeasibleSets, rng: &mut R) -> Result<NetworkGraph> {
    let n = sets.len();
    if n < 2 {
        return Err(Error::DegenerateFleet(n));
    }
    let budgeted = FeasibleSets::from_sets(sets.budgeted.clone());
    if !check_necessary_condition(sets) || !check_necessary_condition(&budgeted) {
        return Err(Error::NoFeasibleTopology("feasible sets do not cover the fleet".into()));
    }

    let succ: Vec<Vec<usize>> = sets.budgeted.iter().map(|s| s.iter().copied().collect()).collect();
    let mut pred = vec![Vec::new(); n];
    for (g, s) in succ.iter().enumerate() {
        for &j in s {
            pred[j].push(g);
        }
    }
    let mut priority: Vec<usize> = (0..n).collect();
    priority.shuffle(rng);

    let mut search = Search { succ: &succ, pred: &pred, priority: &priority, visited: vec![false; n], path: vec![0], steps: 0 };
    search.visited[0] = true;
    if !search.extend()? {
        return Err(Error::NoFeasibleTopology("no directed ring exists within the feasible sets".into()));
    }

    let mut graph = NetworkGraph::new(n, n);
    for k in 0..n {
        let (a, b) = (search.path[k], search.path[(k + 1) % n]);
        let link = *sets.link(a, b).expect("ring edge comes from a feasible set");
        graph.add_edge(a, b, link)?;
    }
    Ok(graph)
}

struct Search<'a> {
    succ: &'a [Vec<usize>],
    pred: &'a [Vec<usize>],
    priority: &'a [usize],
    visited: Vec<bool>,
    path: Vec<usize>,
    steps: u64,
}

impl Search<'_> {
    fn extend(&mut self) -> Result<bool> {
        self.steps += 1;
        if self.steps > SEARCH_BUDGET {
            return Err(Error::NoFeasibleTopology("ring search budget exhausted".into()));
        }
        let n = self.succ.len();
        let cur = *self.path.last().expect("path starts at node 0");
        if self.path.len() == n {
            return Ok(self.succ[cur].contains(&self.path[0]));
        }
        // Fewest onward options first, seeded priority breaks ties.
        let mut options: Vec<(usize, usize, usize)> = self.succ[cur]
            .iter()
            .filter(|&&j| !self.visited[j])
            .map(|&j| (self.onward(j), self.priority[j], j))
            .collect();
        options.sort_unstable();
        for (_, _, next) in options {
            self.visited[next] = true;
            self.path.push(next);
            if self.still_closable(next) && self.extend()? {
                return Ok(true);
            }
            self.path.pop();
            self.visited[next] = false;
        }
        Ok(false)
    }

    fn onward(&self, j: usize) -> usize {
        self.succ[j].iter().filter(|&&k| !self.visited[k] || k == self.path[0]).count()
    }

    /// Every unvisited node still needs an entry from the frontier and an exit toward the start.
    fn still_closable(&self, frontier: usize) -> bool {
        let start = self.path[0];
        (0..self.succ.len()).filter(|&w| !self.visited[w]).all(|w| {
            let has_entry = self.pred[w].iter().any(|&p| p != w && (!self.visited[p] || p == frontier));
            let has_exit = self.succ[w].iter().any(|&s| s != w && (!self.visited[s] || s == start));
            has_entry && has_exit
        })
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::topology::graph::max_shortest_path;

    fn complete(n: usize) -> FeasibleSets {
        FeasibleSets::from_sets((0..n).map(|g| (0..n).filter(|&j| j != g).collect()).collect())
    }

    #[test]
    fn three_node_ring_has_unit_degrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = construct_ring(&complete(3), &mut rng).unwrap();
        assert_eq!(g.num_edges(), 3);
        for k in 0..3 {
            assert_eq!(g.in_degree(k), 1);
            assert_eq!(g.out_degree(k), 1);
        }
    }

    #[test]
    fn five_node_ring_lmax() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = construct_ring(&complete(5), &mut rng).unwrap();
        assert_eq!(g.num_edges(), 5);
        assert_eq!(max_shortest_path(&g).unwrap(), 4);
    }

    #[test]
    fn line_has_no_ring() {
        // 0 <-> 1 <-> 2 <-> 3 covers everyone but admits no Hamiltonian cycle.
        let sets: Vec<BTreeSet<usize>> = vec![[1].into(), [0, 2].into(), [1, 3].into(), [2].into()];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let err = construct_ring(&FeasibleSets::from_sets(sets), &mut rng).unwrap_err();
        assert!(matches!(err, Error::NoFeasibleTopology(_)));
    }

    #[test]
    fn single_node_is_degenerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(construct_ring(&complete(1), &mut rng), Err(Error::DegenerateFleet(1))));
    }
}
