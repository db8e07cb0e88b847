//! Policy and value networks and the PPO trainer.

mod adam;
mod checkpoint;
mod loss;
mod mlp;
mod policy;
mod rollout;
mod trainer;

pub use adam::{clip_grad_norm, Adam};
pub use checkpoint::{Checkpoint, CheckpointHeader, FORMAT_VERSION};
pub use loss::{ppo_loss, Batch, LossConfig, LossStats};
pub use mlp::{count_parameters, Dense, Mlp, MlpCache, Real};
pub use policy::{policy_sizes, value_sizes, ActorCritic, GaussianPolicy, ValueNet, LOG_STD_INIT};
pub use rollout::{gae, normalize, RolloutBuffer};
pub use trainer::{
    checkpoint_path, plateaued, train, Baseline, CurveRow, EvalSummary, TrainConfig, TrainOutcome, CURVE_FILE,
};
