//! Deterministic multi-vehicle intersection simulator: zone maps, kinematic
//! bicycle dynamics, ray observations, discrete incremental actions, the
//! four-term reward, and episode state.

mod controller;
mod dynamics;
pub mod map;
mod observe;
mod reward;
pub mod scenario;
mod world;

pub use controller::{Command, Controller, RandomController, ScriptedFollower, VehicleView};
pub use dynamics::{
    apply_action, step_dynamics, Action, VehicleState, ACCEL_MAX, CG_TO_AXLE, SPEED_MAX,
    STEER_MAX, VEHICLE_LENGTH, VEHICLE_WIDTH,
};
pub use map::{Arrow, Goal, Route, Zone, ZoneKind, ZoneMap};
pub use observe::{Observation, OBS_LEN, RAY_COUNT, RAY_MAX};
pub use reward::{compute_reward, RewardBreakdown, RewardWeights};
pub use scenario::{Mode, PolicyBinding, Scenario, VehicleSpec};
pub use world::{StepReport, VehicleRuntime, World, TRAIN_COLLISION_LIMIT};
