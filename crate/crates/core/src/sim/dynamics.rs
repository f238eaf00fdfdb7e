//! Vehicle state, the nine discrete incremental actions, and the
//! center-of-gravity kinematic bicycle update.

use crate::error::{Error, Result};
use crate::geom::{ORect, Vec2};
use crate::scalar::Real;

pub const VEHICLE_WIDTH: f64 = 1.8;
pub const VEHICLE_LENGTH: f64 = 4.5;
/// Distance from the gravity center to each axle: half the vehicle length.
pub const CG_TO_AXLE: f64 = VEHICLE_LENGTH / 2.0;
pub const SPEED_MAX: f64 = 2.0;
pub const STEER_MAX: f64 = 0.785;
pub const ACCEL_MAX: f64 = 1.0;

/// Pose, speed, and the last applied control of one vehicle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VehicleState<T> {
    pub pos: Vec2<T>,
    pub heading: T,
    pub speed: T,
    /// Last steering angle (rad), in `[-STEER_MAX, STEER_MAX]`.
    pub steer: T,
    /// Last acceleration (m/s^2), in `[-ACCEL_MAX, ACCEL_MAX]`.
    pub accel: T,
}

impl<T: Real> VehicleState<T> {
    pub fn at_rest(pos: Vec2<T>, heading: T) -> Self {
        Self { pos, heading, speed: T::zero(), steer: T::zero(), accel: T::zero() }
    }

    /// Body rectangle: 4.5 m long along the heading, 1.8 m wide.
    pub fn body(&self) -> ORect<T> {
        ORect::new(
            self.pos,
            Vec2::new(T::of(VEHICLE_LENGTH / 2.0), T::of(VEHICLE_WIDTH / 2.0)),
            self.heading,
        )
    }

    pub fn bounds_ok(&self) -> bool {
        self.speed >= T::zero()
            && self.speed <= T::of(SPEED_MAX)
            && self.steer.abs() <= T::of(STEER_MAX)
            && self.accel.abs() <= T::of(ACCEL_MAX)
    }
}

/// The nine discrete actions. Each action changes the control by a fixed
/// rate pair `(steer rate, accel rate)` integrated over one timestep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    Forward,
    Backward,
    Right,
    Left,
    Holding,
    RightForward,
    LeftForward,
    RightBackward,
    LeftBackward,
}

impl Action {
    pub const COUNT: usize = 9;

    pub const ALL: [Action; 9] = [
        Action::Forward,
        Action::Backward,
        Action::Right,
        Action::Left,
        Action::Holding,
        Action::RightForward,
        Action::LeftForward,
        Action::RightBackward,
        Action::LeftBackward,
    ];

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&a| a == self).unwrap()
    }

    pub fn from_index(i: usize) -> Result<Self> {
        Self::ALL
            .get(i)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("action index {i} out of range")))
    }

    /// `(steer rate rad/s, accel rate m/s^3)` pair of the action.
    pub fn rates<T: Real>(self) -> (T, T) {
        let (g1, g2) = match self {
            Action::Forward => (0.0, 2.5),
            Action::Backward => (0.0, -2.5),
            Action::Right => (0.628, 0.0),
            Action::Left => (-0.628, 0.0),
            Action::Holding => (0.0, 0.0),
            Action::RightForward => (0.628, 2.5),
            Action::LeftForward => (-0.628, 2.5),
            Action::RightBackward => (0.628, -2.5),
            Action::LeftBackward => (-0.628, -2.5),
        };
        (T::of(g1), T::of(g2))
    }
}

impl std::fmt::Display for Action {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// New control `(steer, accel)` after applying an action for `dt` seconds,
/// clamped to the control bounds.
pub fn apply_action<T: Real>(state: &VehicleState<T>, action: Action, dt: T) -> (T, T) {
    let (g1, g2) = action.rates::<T>();
    let steer = (g1 * dt + state.steer).clamp_to(-T::of(STEER_MAX), T::of(STEER_MAX));
    let accel = (g2 * dt + state.accel).clamp_to(-T::of(ACCEL_MAX), T::of(ACCEL_MAX));
    (steer, accel)
}

/// One explicit-Euler step of the center-of-gravity kinematic bicycle.
///
/// With equal front/rear axle distances, the slip angle is
/// `beta = atan(tan(steer) / 2)`; the position advances along
/// `heading + beta` using the pre-update speed, the heading rate is
/// `speed * sin(beta) / CG_TO_AXLE`, and the speed is clamped to
/// `[0, SPEED_MAX]` after integrating the acceleration.
pub fn step_dynamics<T: Real>(
    state: &VehicleState<T>,
    control: (T, T),
    dt: T,
) -> VehicleState<T> {
    let (steer, accel) = control;
    let beta = (steer.tan() / T::of(2.0)).atan();
    let dir = state.heading + beta;
    let pos = state.pos + Vec2::from_angle(dir) * (state.speed * dt);
    let heading = state.heading + state.speed / T::of(CG_TO_AXLE) * beta.sin() * dt;
    let speed = (state.speed + accel * dt).clamp_to(T::zero(), T::of(SPEED_MAX));
    VehicleState { pos, heading, speed, steer, accel }
}
