//! Directional mmWave air-to-ground channel: steering vectors, the beam
//! codebook, a seeded ground-truth gain field, pilot-based gain estimation
//! and per-node CSI datasets.

mod dataset;
mod estimation;
mod field;
mod steering;

pub use dataset::{collect_dataset, read_dataset_csv, write_dataset_csv, ChannelSample, TrajectoryPoint, DATASET_HEADER};
pub use estimation::{complex_gaussian, estimate_gain, received_pilot, ChannelMatrix, MIN_BEAM_NORMALIZATION};
pub use field::{bearing, distance, true_gain, GroundTruthField};
pub use steering::{inner, norm, steering_vector, Codebook, CodebookEntry, SteeringVector};

/// Cartesian position in meters.
pub type Vec3 = [f64; 3];

/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
