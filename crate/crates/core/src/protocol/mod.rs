//! Round-based distributed training: sample sharing over the topology,
//! baseline schemes, and a Monte Carlo model of information propagation.

mod engine;
mod metrics;
mod oracle;
mod schemes;

pub use engine::{
    all_at_equilibrium, evaluate_round, run_round, run_until_ne, Evaluator, NodeRuntime, ProtocolConfig, RoundRecord,
    SharedBatch, SharedSample, SimulationState,
};
pub use metrics::{write_metrics_csv, METRICS_HEADER};
pub use oracle::{propagation_oracle, OracleEstimate};
pub use schemes::{
    average_parameters, node_frames, run_baseline, Centralized, Distributed, ParameterAveraging, SchemeContext, SchemeRegistry, SchemeRun,
    Standalone, TrainingScheme,
};
