//! Experiment drivers that emit the CSV tables behind each figure, plus
//! SVG views of those tables.

mod analytics;
mod learning;
mod plot;
mod simulate;
mod training;

pub use analytics::{
    convergence_params, curve_csv, experiment_fig3, experiment_fig4, experiment_overhead, topology_for, FIG3_HEADER,
    FIG4_HEADER, OVERHEAD_HEADER,
};
pub use learning::{
    beam_selection_rate, cached_part, experiment_jsd, experiment_rate, jsd_rows, learned_beams, RateSummary, JSD_HEADER,
    RATE_HEADER,
};
pub use plot::{chart_from_csv, line_chart, series_from_csv, Series};
pub use simulate::{simulate, SimulationSummary};
pub use training::{protocol_config, worker_pool, TrainingSetup};
