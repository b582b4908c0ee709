//! UAV data-sharing graph: link budgets, feasible neighbor sets, ring
//! construction and budgeted augmentation.

mod feasible;
mod graph;
mod io;
mod link;
mod prune;
mod ring;

pub use feasible::{check_necessary_condition, feasible_set, FeasibleSets};
pub use graph::{max_shortest_path, min_loop, min_loops, NetworkGraph};
pub use io::{read_edges_csv, write_edges_csv, write_summary_json, TopologySummary, EDGE_HEADER};
pub use link::{
    db_to_linear, dbm_to_watts, free_space_path_loss, linear_to_db, rate_from_snr, shannon_rate, Link, LinkBudget,
    LinkConfig,
};
pub use prune::augment_and_prune;
pub use ring::construct_ring;
