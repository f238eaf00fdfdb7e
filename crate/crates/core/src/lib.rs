//! Deterministic 2D intersection traffic simulation and a toolkit for
//! training, evaluating, and selecting behaviorally diverse driving policies.
//!
//! The crate is organized around a small number of building blocks:
//!
//! - [`trajectory`]: time-indexed vehicle-center traces and the average
//!   Euclidean distance between two traces, the ground metric everything
//!   else is built on.
//! - [`metrics`]: inter-policy diversity (mean pairwise trajectory distance
//!   over shared successful scenarios) and overall diversity (exact
//!   Wasserstein-1 distance between trajectory sets, averaged over
//!   scenarios).
//! - [`select`]: driving-score filtering and greedy farthest-point
//!   selection of a maximally distant policy subset.
//! - [`sim`]: the traffic simulator proper — zone maps, kinematic bicycle
//!   dynamics, 32-direction ray observations, and the four-term reward.
//! - [`learn`]: a small value-based learner (fully-connected Q network,
//!   uniform replay, target network) with an optional KL-divergence
//!   intrinsic reward coupling parallel training sessions.
//! - [`refgen`]: reference-trajectory generation from Brownian-bridge
//!   perturbations of a core path, converted through a P-control vehicle.
//!
//! All numeric code is generic over the scalar type via [`Real`]; concrete
//! `f64` aliases are exported at the crate root for everyday use.

pub mod episode;
pub mod error;
pub mod flow;
pub mod geom;
pub mod learn;
pub mod metrics;
pub mod refgen;
pub mod scalar;
pub mod seeds;
pub mod select;
pub mod sim;
pub mod trajectory;
pub mod trajlog;

pub use error::{Error, Result};
pub use scalar::Real;

/// Simulation timestep in seconds. One trajectory point is recorded per step.
pub const DT: f64 = 0.1;

// Concrete double-precision aliases. The CLI and most tests work in `f64`;
// the generic types remain available for `f32` instantiation.
pub type Vec2_64 = geom::Vec2<f64>;
pub type Trajectory64 = trajectory::Trajectory<f64>;
pub type EvaluationTable64 = metrics::EvaluationTable<f64>;
pub type DistanceMatrix64 = metrics::DistanceMatrix<f64>;
pub type CandidatePool64 = select::CandidatePool<f64>;
pub type ZoneMap64 = sim::ZoneMap<f64>;
pub type Scenario64 = sim::Scenario<f64>;
pub type World64 = sim::World<f64>;
pub type VehicleState64 = sim::VehicleState<f64>;
pub type Observation64 = sim::Observation<f64>;
pub type RewardWeights64 = sim::RewardWeights<f64>;
pub type QNet64 = learn::QNet<f64>;
pub type PolicySnapshot64 = learn::PolicySnapshot<f64>;
pub type CoreTrajectory64 = refgen::CoreTrajectory<f64>;
