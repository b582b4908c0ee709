//! Per-node conditional adversarial learner: dense generator and
//! discriminator, mixture weights, value functions, training steps and
//! histogram-based Jensen-Shannon divergence.

mod jsd;
mod mlp;
mod nets;
mod objective;
mod state;

pub use jsd::{average_jsd, jsd, ne_check, Binning2D, Histogram};
pub use mlp::{Mlp, Trace};
pub use nets::{log_sigmoid, logit_bound, sigmoid, CondSample, Condition, Discriminator, Generator, Standardizer, LOG_EPS};
pub use objective::{
    disc_gradient, disc_objective, gen_gradient, gen_loss, mix_weights, mixed_value_function, mixture_counts,
    train_step_disc, train_step_gen, value_function, GenLoss, MixRule, MixWeights, Optimizer, OptimizerKind,
};
pub use state::{read_checkpoint, write_checkpoint, Checkpoint, LearnerConfig, LearnerState};
