//! Value-based policy learning: a small fully-connected Q network, uniform
//! replay with a periodically synced target network, epsilon-greedy
//! exploration, snapshotting at a fixed step cadence, and an optional
//! KL-divergence intrinsic reward that couples parallel sessions.

mod net;
mod replay;
mod snapshot;
mod trainer;

pub use net::{
    kl_divergence, Adam, QNet, TdBatch, ACTION_DIM, HIDDEN_DIM, OBS_DIM, PARAM_COUNT,
};
pub use replay::{ReplayBuffer, Transition};
pub use snapshot::{PolicySnapshot, SNAPSHOT_VERSION};
pub use trainer::{
    intrinsic_reward, intrinsic_reward_from_distributions, train_sessions, QController, Schedule,
    SessionStats, TrainerConfig,
};
