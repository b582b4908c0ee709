use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::link::Link;
use crate::error::{Error, Result};

/// Directed data-sharing graph over UAVs `0..num_nodes`.
///
/// An edge `g -> j` means `g` ships generated samples to `j` each round.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    num_nodes: usize,
    resource_blocks: usize,
    edges: BTreeMap<(usize, usize), Link>,
}

impl NetworkGraph {
    pub fn new(num_nodes: usize, resource_blocks: usize) -> Self {
        Self { num_nodes, resource_blocks, edges: BTreeMap::new() }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn resource_blocks(&self) -> usize {
        self.resource_blocks
    }

    pub fn set_resource_blocks(&mut self, blocks: usize) -> Result<()> {
        if self.edges.len() > blocks {
            return Err(Error::InsufficientResourceBlocks { blocks, nodes: self.num_nodes });
        }
        self.resource_blocks = blocks;
        Ok(())
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Add an edge; fails once every resource block is taken.
    pub fn add_edge(&mut self, from: usize, to: usize, link: Link) -> Result<()> {
        if from >= self.num_nodes || to >= self.num_nodes || from == to {
            return Err(Error::ShapeMismatch(format!("edge {from}->{to} in a {}-node graph", self.num_nodes)));
        }
        if !self.edges.contains_key(&(from, to)) && self.edges.len() >= self.resource_blocks {
            return Err(Error::InsufficientResourceBlocks { blocks: self.resource_blocks, nodes: self.num_nodes });
        }
        self.edges.insert((from, to), link);
        Ok(())
    }

    pub fn remove_edge(&mut self, from: usize, to: usize) -> Option<Link> {
        self.edges.remove(&(from, to))
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.contains_key(&(from, to))
    }

    pub fn link(&self, from: usize, to: usize) -> Option<&Link> {
        self.edges.get(&(from, to))
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &Link)> + '_ {
        self.edges.iter().map(|(&(a, b), l)| (a, b, l))
    }

    /// `Q_g`: nodes `g` sends to.
    pub fn out_neighbors(&self, g: usize) -> BTreeSet<usize> {
        self.edges.keys().filter(|(a, _)| *a == g).map(|&(_, b)| b).collect()
    }

    /// `C_g`: nodes sending to `g`.
    pub fn in_neighbors(&self, g: usize) -> BTreeSet<usize> {
        self.edges.keys().filter(|(_, b)| *b == g).map(|&(a, _)| a).collect()
    }

    pub fn out_degree(&self, g: usize) -> usize {
        self.edges.keys().filter(|(a, _)| *a == g).count()
    }

    pub fn in_degree(&self, g: usize) -> usize {
        self.edges.keys().filter(|(_, b)| *b == g).count()
    }

    pub fn max_in_degree(&self) -> usize {
        (0..self.num_nodes).map(|g| self.in_degree(g)).max().unwrap_or(0)
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_nodes];
        for &(a, b) in self.edges.keys() {
            adj[a].push(b);
        }
        adj
    }

    /// BFS hop counts from `src`; `None` where unreachable.
    pub fn distances_from(&self, src: usize) -> Vec<Option<usize>> {
        bfs(&self.adjacency(), src)
    }

    pub fn all_pairs_hops(&self) -> Vec<Vec<Option<usize>>> {
        let adj = self.adjacency();
        (0..self.num_nodes).map(|s| bfs(&adj, s)).collect()
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.all_pairs_hops().iter().all(|row| row.iter().all(Option::is_some))
    }
}

fn bfs(adj: &[Vec<usize>], src: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[src] = Some(0);
    let mut queue = VecDeque::from([src]);
    while let Some(x) = queue.pop_front() {
        let dx = dist[x].unwrap_or(0);
        for &y in &adj[x] {
            if dist[y].is_none() {
                dist[y] = Some(dx + 1);
                queue.push_back(y);
            }
        }
    }
    dist
}

/// Largest shortest-path hop count over ordered node pairs.
pub fn max_shortest_path(graph: &NetworkGraph) -> Result<usize> {
    let mut worst = 0;
    for row in graph.all_pairs_hops() {
        for d in row {
            worst = worst.max(d.ok_or(Error::NotStronglyConnected)?);
        }
    }
    Ok(worst)
}

/// Length of the shortest directed cycle through `node`.
pub fn min_loop(graph: &NetworkGraph, node: usize) -> Result<usize> {
    if !graph.is_strongly_connected() || graph.num_nodes() < 2 {
        return Err(Error::NotStronglyConnected);
    }
    graph
        .out_neighbors(node)
        .into_iter()
        .filter_map(|s| graph.distances_from(s)[node].map(|d| d + 1))
        .min()
        .ok_or(Error::NotStronglyConnected)
}

/// Shortest cycle length through each node.
pub fn min_loops(graph: &NetworkGraph) -> Result<Vec<usize>> {
    (0..graph.num_nodes()).map(|g| min_loop(graph, g)).collect()
}
