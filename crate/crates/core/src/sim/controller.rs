//! Per-vehicle controllers. Learned policies emit one of the nine
//! incremental actions; scripted vehicles and trajectory trackers may set
//! the control directly (clamped to the same bounds).

use crate::geom::wrap_angle;
use crate::scalar::Real;
use crate::sim::dynamics::{Action, VehicleState, ACCEL_MAX, STEER_MAX};
use crate::sim::map::Route;
use crate::sim::observe::Observation;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a controller asks of the vehicle this step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Command<T> {
    Action(Action),
    /// Direct control, clamped to the steering/acceleration bounds before
    /// integration.
    Direct { steer: T, accel: T },
}

impl<T: Real> Command<T> {
    pub fn clamped(self) -> Command<T> {
        match self {
            Command::Action(a) => Command::Action(a),
            Command::Direct { steer, accel } => Command::Direct {
                steer: steer.clamp_to(-T::of(STEER_MAX), T::of(STEER_MAX)),
                accel: accel.clamp_to(-T::of(ACCEL_MAX), T::of(ACCEL_MAX)),
            },
        }
    }
}

/// Read-only view of the controlled vehicle, for controllers that use
/// privileged state (route followers) instead of ray observations.
pub struct VehicleView<'a, T> {
    pub state: &'a VehicleState<T>,
    pub route: &'a Route<T>,
    pub step: u64,
}

pub trait Controller<T: Real> {
    fn act(&mut self, obs: &Observation<T>, view: &VehicleView<'_, T>) -> Command<T>;
}

/// Non-reactive route follower with proportional control: steer toward a
/// lookahead point on the route and regulate speed from the gap to it.
#[derive(Clone, Debug)]
pub struct ScriptedFollower<T> {
    pub steer_gain: T,
    pub accel_gain: T,
    /// Lookahead horizon in seconds (the tracked point sits at the arc the
    /// vehicle would reach in this time at its target speed).
    pub lookahead: T,
    pub target_speed: T,
}

impl<T: Real> Default for ScriptedFollower<T> {
    fn default() -> Self {
        Self {
            steer_gain: T::of(1.0),
            accel_gain: T::of(3.0),
            lookahead: T::of(2.0),
            target_speed: T::of(1.5),
        }
    }
}

impl<T: Real> Controller<T> for ScriptedFollower<T> {
    fn act(&mut self, _obs: &Observation<T>, view: &VehicleView<'_, T>) -> Command<T> {
        let state = view.state;
        let here = view.route.project_arc(state.pos);
        let ahead = here + self.target_speed * self.lookahead;
        let target = view.route.point_at_arc(ahead);
        let gap = target - state.pos;
        let dist = gap.norm();
        if dist == T::zero() {
            return Command::Direct { steer: T::zero(), accel: T::zero() }.clamped();
        }
        let omega = wrap_angle(gap.angle() - state.heading);
        let steer = self.steer_gain * omega.sin();
        let accel = self.accel_gain * dist / T::of(2.0) - state.speed * omega.sin();
        Command::Direct { steer, accel }.clamped()
    }
}

/// Uniform-random action policy, the skill baseline.
pub struct RandomController {
    rng: ChaCha8Rng,
}

impl RandomController {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl<T: Real> Controller<T> for RandomController {
    fn act(&mut self, _obs: &Observation<T>, _view: &VehicleView<'_, T>) -> Command<T> {
        let i = self.rng.random_range(0..Action::COUNT);
        Command::Action(Action::from_index(i).expect("index in range"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;
    use crate::sim::map::Arrow;

    fn straight_route() -> Route<f64> {
        Route {
            name: "r".into(),
            arrows: vec![Arrow { start: Vec2::new(0.0, 0.0), end: Vec2::new(100.0, 0.0) }],
        }
    }

    #[test]
    fn follower_accelerates_toward_the_route() {
        let route = straight_route();
        let state = VehicleState::at_rest(Vec2::new(0.0, 0.0), 0.0);
        let view = VehicleView { state: &state, route: &route, step: 0 };
        let obs_unused = dummy_obs();
        let mut f = ScriptedFollower::<f64>::default();
        match f.act(&obs_unused, &view) {
            Command::Direct { steer, accel } => {
                assert_eq!(steer, 0.0);
                assert_eq!(accel, 1.0); // 3 * 3m/2 clamped to 1
            }
            _ => panic!("follower commands directly"),
        }
    }

    #[test]
    fn follower_steers_back_to_the_center() {
        let route = straight_route();
        let mut state = VehicleState::at_rest(Vec2::new(10.0, 2.0), 0.0);
        state.speed = 1.0;
        let view = VehicleView { state: &state, route: &route, step: 0 };
        let mut f = ScriptedFollower::<f64>::default();
        match f.act(&dummy_obs(), &view) {
            Command::Direct { steer, .. } => assert!(steer < 0.0, "steer toward the lane center"),
            _ => panic!(),
        }
    }

    #[test]
    fn random_controller_is_seeded() {
        let route = straight_route();
        let state = VehicleState::at_rest(Vec2::new(0.0, 0.0), 0.0);
        let view = VehicleView { state: &state, route: &route, step: 0 };
        let seq = |seed: u64| -> Vec<usize> {
            let mut c = RandomController::new(seed);
            (0..20)
                .map(|_| match Controller::<f64>::act(&mut c, &dummy_obs(), &view) {
                    Command::Action(a) => a.index(),
                    _ => unreachable!(),
                })
                .collect()
        };
        assert_eq!(seq(9), seq(9));
        assert_ne!(seq(9), seq(10));
    }

    fn dummy_obs() -> Observation<f64> {
        Observation {
            walls: [50.0; 32],
            route_first: [50.0; 32],
            route_second: [50.0; 32],
            vehicles: [50.0; 32],
            straight_zones: [50.0; 32],
            intersection_zones: [50.0; 32],
            history: [(0.0, 0.0, 0.0); 3],
        }
    }
}
