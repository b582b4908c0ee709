//! Edge-list CSV and summary JSON for a built topology.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::graph::{max_shortest_path, min_loops, NetworkGraph};
use super::link::Link;
use crate::error::{Error, Result};

pub const EDGE_HEADER: [&str; 5] = ["src", "dst", "tx_power_dbm", "path_loss_db", "rate_bps"];

#[derive(Debug, Serialize, Deserialize)]
struct EdgeRow {
    src: usize,
    dst: usize,
    tx_power_dbm: f64,
    path_loss_db: f64,
    rate_bps: f64,
}

/// Headline structure of a topology.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologySummary {
    pub l_max: usize,
    pub l_loop_min: Vec<usize>,
    pub num_edges: usize,
}

impl TopologySummary {
    pub fn of(graph: &NetworkGraph) -> Result<Self> {
        Ok(Self { l_max: max_shortest_path(graph)?, l_loop_min: min_loops(graph)?, num_edges: graph.num_edges() })
    }
}

pub fn write_edges_csv<W: Write>(graph: &NetworkGraph, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (src, dst, l) in graph.edges() {
        w.serialize(EdgeRow { src, dst, tx_power_dbm: l.tx_power_dbm, path_loss_db: l.path_loss_db, rate_bps: l.rate_bps })?;
    }
    if graph.num_edges() == 0 {
        w.write_record(EDGE_HEADER)?;
    }
    w.flush()?;
    Ok(())
}

/// Rebuild a graph from an edge list; the block count is set to the edge count.
pub fn read_edges_csv<R: Read>(input: R, num_nodes: usize) -> Result<NetworkGraph> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != EDGE_HEADER {
        return Err(Error::Parse(format!("unexpected edge header {headers:?}")));
    }
    let rows: Vec<EdgeRow> = r.deserialize().collect::<std::result::Result<_, _>>()?;
    let mut graph = NetworkGraph::new(num_nodes, rows.len());
    for row in rows {
        let link = Link { tx_power_dbm: row.tx_power_dbm, path_loss_db: row.path_loss_db, rate_bps: row.rate_bps };
        graph.add_edge(row.src, row.dst, link)?;
    }
    Ok(graph)
}

pub fn write_summary_json<W: Write>(graph: &NetworkGraph, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, &TopologySummary::of(graph)?)?;
    Ok(())
}
