//! Mutable simulation state: all vehicles of one scenario plus the map.
//!
//! A world is single-threaded and owns all mutable state; independent
//! worlds (different scenarios or sessions) can run concurrently. Vehicles
//! move simultaneously: the caller computes every control from the
//! pre-step world, then [`World::step`] integrates them all at once.

use crate::error::Result;
use crate::scalar::Real;
use crate::sim::dynamics::{step_dynamics, VehicleState};
use crate::sim::map::ZoneMap;
use crate::sim::scenario::{Mode, PolicyBinding, Scenario};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Training episodes end after this many collisions of the trainee.
pub const TRAIN_COLLISION_LIMIT: u32 = 150;

#[derive(Clone, Debug)]
pub struct VehicleRuntime<T> {
    pub state: VehicleState<T>,
    pub route: usize,
    /// `(speed, accel, steer)` of the last three steps, most recent first.
    pub history: [(T, T, T); 3],
    pub collisions: u32,
    pub ignore_ego: bool,
    /// Agent-controlled (ego or shared copy): collides "physically" in
    /// training mode (state reverts for one step).
    pub is_agent: bool,
}

impl<T: Real> VehicleRuntime<T> {
    fn push_history(&mut self) {
        let h = (self.state.speed, self.state.accel, self.state.steer);
        self.history = [h, self.history[0], self.history[1]];
    }
}

#[derive(Clone, Debug)]
pub struct StepReport<T> {
    pub prev_states: Vec<VehicleState<T>>,
    /// Whether each vehicle was involved in a collision this step.
    pub collided: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct World<T> {
    pub map: ZoneMap<T>,
    pub vehicles: Vec<VehicleRuntime<T>>,
    pub mode: Mode,
    pub ego: usize,
    pub steps: u64,
}

impl<T: Real> World<T> {
    /// Build the world and place every vehicle at its (perturbed) start.
    /// The perturbation offsets draw from `rng` in vehicle order.
    pub fn from_scenario(scenario: &Scenario<T>, rng: &mut ChaCha8Rng) -> Result<Self> {
        let ego = scenario.ego_index()?;
        let mut world = Self {
            map: scenario.map.clone(),
            vehicles: Vec::with_capacity(scenario.vehicles.len()),
            mode: scenario.mode,
            ego,
            steps: 0,
        };
        for spec in &scenario.vehicles {
            world.vehicles.push(VehicleRuntime {
                state: VehicleState::at_rest(crate::geom::Vec2::zero(), T::zero()),
                route: spec.route,
                history: [(T::zero(), T::zero(), T::zero()); 3],
                collisions: 0,
                ignore_ego: spec.ignore_ego,
                is_agent: matches!(spec.binding, PolicyBinding::Ego | PolicyBinding::SharedEgo),
            });
        }
        world.reset(scenario, rng);
        Ok(world)
    }

    /// Reposition all vehicles at freshly perturbed starts (training
    /// episode reset). Offsets are uniform along the route direction.
    pub fn reset(&mut self, scenario: &Scenario<T>, rng: &mut ChaCha8Rng) {
        for (v, spec) in self.vehicles.iter_mut().zip(&scenario.vehicles) {
            let route = &scenario.map.routes[spec.route];
            let offset = if spec.perturb > T::zero() {
                let p = spec.perturb.to_f64_lossy();
                T::of(rng.random_range(-p..p))
            } else {
                T::zero()
            };
            let arc = (spec.start_arc + offset)
                .clamp_to(T::zero(), route.total_length());
            let pos = route.point_at_arc(arc);
            let heading = route.tangent_at_arc(arc).angle();
            v.state = VehicleState {
                pos,
                heading,
                speed: spec.start_speed,
                steer: T::zero(),
                accel: T::zero(),
            };
            let h0 = (v.state.speed, T::zero(), T::zero());
            v.history = [h0, h0, h0];
            v.collisions = 0;
        }
        self.steps = 0;
    }

    /// Integrate one timestep with the given per-vehicle controls
    /// (already clamped to the control bounds).
    pub fn step(&mut self, controls: &[(T, T)]) -> StepReport<T> {
        let dt = T::of(crate::DT);
        let n = self.vehicles.len();
        assert_eq!(controls.len(), n, "one control per vehicle");

        let prev_states: Vec<VehicleState<T>> =
            self.vehicles.iter().map(|v| v.state).collect();
        let tentative: Vec<VehicleState<T>> = self
            .vehicles
            .iter()
            .zip(controls)
            .map(|(v, &c)| step_dynamics(&v.state, c, dt))
            .collect();

        let mut collided = vec![false; n];
        for (i, s) in tentative.iter().enumerate() {
            let body = s.body();
            if self.map.walls.iter().any(|w| body.intersects_segment(w)) {
                collided[i] = true;
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if tentative[i].body().overlaps(&tentative[j].body()) {
                    collided[i] = true;
                    collided[j] = true;
                }
            }
        }

        for (i, v) in self.vehicles.iter_mut().enumerate() {
            if collided[i] && v.is_agent {
                v.collisions += 1;
            }
            // In training, a colliding agent holds its previous state for
            // one step (no penetration); non-reactive traffic never reacts
            // to collisions, keeping its trajectories scenario-constant.
            let revert = self.mode == Mode::Train && v.is_agent && collided[i];
            if !revert {
                v.state = tentative[i];
            }
            v.push_history();
        }
        self.steps += 1;
        StepReport { prev_states, collided }
    }

    pub fn ego_state(&self) -> &VehicleState<T> {
        &self.vehicles[self.ego].state
    }

    /// Does the ego body overlap its route's goal area?
    pub fn ego_in_goal(&self) -> bool {
        match self.map.goal_for_route(self.vehicles[self.ego].route) {
            Some(g) => self.vehicles[self.ego].state.body().overlaps(&g.rect),
            None => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;
    use crate::sim::map::{Arrow, Goal, Route, ZoneMap};
    use crate::sim::scenario::VehicleSpec;
    use rand::SeedableRng;

    fn lane_map() -> ZoneMap<f64> {
        ZoneMap {
            name: "lane".into(),
            walls: vec![
                crate::geom::Segment::new(Vec2::new(0.0, 0.0), Vec2::new(60.0, 0.0)),
                crate::geom::Segment::new(Vec2::new(0.0, 6.0), Vec2::new(60.0, 6.0)),
            ],
            routes: vec![Route {
                name: "ego".into(),
                arrows: vec![Arrow { start: Vec2::new(0.0, 3.0), end: Vec2::new(60.0, 3.0) }],
            }],
            zones: vec![],
            goals: vec![Goal {
                route: 0,
                rect: crate::geom::ORect::new(Vec2::new(32.0, 3.0), Vec2::new(2.0, 3.0), 0.0),
            }],
        }
    }

    fn scenario(mode: Mode) -> Scenario<f64> {
        Scenario {
            id: "t".into(),
            map: lane_map(),
            vehicles: vec![VehicleSpec {
                route: 0,
                start_arc: 2.0,
                start_speed: 0.0,
                perturb: 0.0,
                binding: PolicyBinding::Ego,
                ignore_ego: false,
            }],
            seed: 1,
            time_limit: 25.0,
            mode,
        }
    }

    #[test]
    fn placement_follows_route() {
        let sc = scenario(Mode::Eval);
        let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
        let w = World::from_scenario(&sc, &mut rng).unwrap();
        assert_eq!(w.vehicles[0].state.pos, Vec2::new(2.0, 3.0));
        assert_eq!(w.vehicles[0].state.heading, 0.0);
    }

    #[test]
    fn perturbation_is_deterministic_per_seed() {
        let mut sc = scenario(Mode::Eval);
        sc.vehicles[0].perturb = 2.0;
        let place = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            World::from_scenario(&sc, &mut rng).unwrap().vehicles[0].state.pos
        };
        assert_eq!(place(5), place(5));
        assert_ne!(place(5), place(6));
    }

    #[test]
    fn train_collision_reverts_agent() {
        let mut sc = scenario(Mode::Train);
        // Aim the ego at the lower wall from close range.
        sc.vehicles[0].start_arc = 10.0;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut w = World::from_scenario(&sc, &mut rng).unwrap();
        w.vehicles[0].state.heading = -std::f64::consts::FRAC_PI_2;
        w.vehicles[0].state.speed = 2.0;
        let mut hits = 0;
        let mut prev = w.vehicles[0].state;
        for _ in 0..40 {
            let r = w.step(&[(0.0, 1.0)]);
            if r.collided[0] {
                hits += 1;
                assert_eq!(w.vehicles[0].state, prev, "colliding step must not move the agent");
                break;
            }
            prev = w.vehicles[0].state;
        }
        assert!(hits > 0, "vehicle should reach the wall");
        assert_eq!(w.vehicles[0].collisions, 1);
    }

    #[test]
    fn eval_collision_does_not_revert() {
        let mut sc = scenario(Mode::Eval);
        sc.vehicles[0].start_arc = 10.0;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut w = World::from_scenario(&sc, &mut rng).unwrap();
        w.vehicles[0].state.heading = -std::f64::consts::FRAC_PI_2;
        w.vehicles[0].state.speed = 2.0;
        let mut collided = false;
        let mut last_y = w.vehicles[0].state.pos.y;
        for _ in 0..40 {
            let r = w.step(&[(0.0, 0.0)]);
            if r.collided[0] {
                collided = true;
                assert!(w.vehicles[0].state.pos.y < last_y);
                break;
            }
            last_y = w.vehicles[0].state.pos.y;
        }
        assert!(collided);
    }

    #[test]
    fn goal_overlap() {
        let sc = scenario(Mode::Eval);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut w = World::from_scenario(&sc, &mut rng).unwrap();
        assert!(!w.ego_in_goal());
        w.vehicles[0].state.pos = Vec2::new(30.5, 3.0);
        assert!(w.ego_in_goal());
    }

    #[test]
    fn history_tracks_last_three_states() {
        let sc = scenario(Mode::Eval);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut w = World::from_scenario(&sc, &mut rng).unwrap();
        assert_eq!(w.vehicles[0].history, [(0.0, 0.0, 0.0); 3]);
        w.step(&[(0.1, 1.0)]);
        w.step(&[(0.2, 1.0)]);
        let h = w.vehicles[0].history;
        assert_eq!(h[0], (0.2, 1.0, 0.2));
        assert_eq!(h[1], (0.1, 1.0, 0.1));
        assert_eq!(h[2], (0.0, 0.0, 0.0));
    }
}
