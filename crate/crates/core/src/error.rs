use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("antenna array needs at least one element")]
    InvalidAntennaCount,
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("beam pair normalization {magnitude:e} is below 1e-12")]
    IllConditionedBeamPair { magnitude: f64 },
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("direction index {index} outside [1, {max}]")]
    DirectionOutOfRange { index: usize, max: usize },

    #[error("no feasible topology: {0}")]
    NoFeasibleTopology(String),
    #[error("fleet of {0} node(s) cannot form a ring")]
    DegenerateFleet(usize),
    #[error("{blocks} resource block(s) cannot serve {nodes} nodes")]
    InsufficientResourceBlocks { blocks: usize, nodes: usize },
    #[error("graph is not strongly connected")]
    NotStronglyConnected,

    #[error("target probability {target} not reached within {cap} iterations")]
    TargetUnreachable { target: f64, cap: u32 },

    #[error("local dataset is empty")]
    EmptyDataset,
    #[error("non-finite gradient in {0}")]
    NumericalDivergence(String),
    #[error("training diverged at round {round}: {source}")]
    DivergedAtRound {
        round: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("unknown baseline scheme `{0}`")]
    UnknownBaseline(String),

    #[error("config file not found: {}", .0.display())]
    ConfigNotFound(PathBuf),
    #[error("invalid config at `{path}`: {message}")]
    ConfigInvalid { path: String, message: String },

    #[error("malformed input: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidAntennaCount => "InvalidAntennaCount",
            Error::DegenerateGeometry(_) => "DegenerateGeometry",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::IllConditionedBeamPair { .. } => "IllConditionedBeamPair",
            Error::EmptyTrajectory => "EmptyTrajectory",
            Error::DirectionOutOfRange { .. } => "DirectionOutOfRange",
            Error::NoFeasibleTopology(_) => "NoFeasibleTopology",
            Error::DegenerateFleet(_) => "DegenerateFleet",
            Error::InsufficientResourceBlocks { .. } => "InsufficientResourceBlocks",
            Error::NotStronglyConnected => "NotStronglyConnected",
            Error::TargetUnreachable { .. } => "TargetUnreachable",
            Error::EmptyDataset => "EmptyDataset",
            Error::NumericalDivergence(_) => "NumericalDivergence",
            Error::DivergedAtRound { .. } => "NumericalDivergence",
            Error::UnknownBaseline(_) => "UnknownBaseline",
            Error::ConfigNotFound(_) => "ConfigNotFound",
            Error::ConfigInvalid { .. } => "ConfigInvalid",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
            Error::Csv(_) => "Csv",
            Error::Json(_) => "Json",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
