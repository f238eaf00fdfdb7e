//! Episode execution: builds a world from a scenario, binds controllers,
//! steps to termination, and records the ego trajectory log.
//!
//! Evaluation episodes end on the first ego collision (COLLISION), on goal
//! overlap (GOAL), or at the time limit (TIMEOUT). Training-style episodes
//! never end on a goal: they run to the time limit unless the agent
//! exceeds the collision budget.

use crate::error::{Error, Result};
use crate::learn::{PolicySnapshot, QController};
use crate::scalar::Real;
use crate::sim::{
    apply_action, compute_reward, Command, Controller, Mode, PolicyBinding, RewardWeights,
    Scenario, ScriptedFollower, VehicleView, World, TRAIN_COLLISION_LIMIT,
};
use crate::trajectory::Trajectory;
use crate::trajlog::{EpisodeLog, Outcome, StepRecord};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::Path;

#[derive(Clone, Debug)]
pub struct EpisodeResult<T> {
    pub outcome: Outcome,
    pub steps: u64,
    pub trajectory: Trajectory<T>,
    pub total_reward: T,
    pub log: EpisodeLog,
}

/// Run one episode of the scenario. `agent` builds a fresh controller for
/// every agent-bound vehicle (the ego and any shared copies); scripted
/// vehicles run the default route follower; snapshot-bound vehicles load
/// their file (relative paths resolve against the current directory).
/// Deterministic given the scenario seed.
pub fn run_episode<T: Real>(
    scenario: &Scenario<T>,
    agent: &mut dyn FnMut() -> Box<dyn Controller<T>>,
    weights: &RewardWeights<T>,
    policy_label: &str,
) -> Result<EpisodeResult<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let mut world = World::from_scenario(scenario, &mut rng)?;
    let ego = world.ego;

    let mut controllers: Vec<Box<dyn Controller<T>>> = Vec::with_capacity(scenario.vehicles.len());
    for spec in &scenario.vehicles {
        controllers.push(match &spec.binding {
            PolicyBinding::Ego | PolicyBinding::SharedEgo => agent(),
            PolicyBinding::Scripted => Box::new(ScriptedFollower::default()),
            PolicyBinding::Snapshot(path) => {
                let snap = PolicySnapshot::<T>::load(Path::new(path))?;
                Box::new(QController::new(snap.net()))
            }
        });
    }

    let dt = T::of(crate::DT);
    let limit = scenario.time_limit_steps();
    let mut total_reward = T::zero();
    let mut records = vec![record_of(&world, ego, 0)];
    let mut outcome = Outcome::Timeout;
    let mut steps = 0;

    for step in 1..=limit {
        let n = world.vehicles.len();
        let mut controls = Vec::with_capacity(n);
        for i in 0..n {
            let state = world.vehicles[i].state;
            let obs = world.observe(i);
            let view = VehicleView {
                state: &state,
                route: &world.map.routes[world.vehicles[i].route],
                step: world.steps,
            };
            let control = match controllers[i].act(&obs, &view).clamped() {
                Command::Action(a) => apply_action(&state, a, dt),
                Command::Direct { steer, accel } => (steer, accel),
            };
            controls.push(control);
        }
        let report = world.step(&controls);
        steps = step;
        records.push(record_of(&world, ego, step));

        let breakdown = compute_reward(
            &world.map,
            world.vehicles[ego].route,
            &report.prev_states[ego],
            &world.vehicles[ego].state,
            report.collided[ego],
            weights,
        );
        total_reward += breakdown.total();

        match scenario.mode {
            Mode::Eval => {
                if report.collided[ego] {
                    outcome = Outcome::Collision;
                    break;
                }
                if world.ego_in_goal() {
                    outcome = Outcome::Goal;
                    break;
                }
            }
            Mode::Train => {
                if world.vehicles[ego].collisions > TRAIN_COLLISION_LIMIT {
                    outcome = Outcome::Collision;
                    break;
                }
            }
        }
    }

    let points = records.iter().map(|r| crate::geom::Vec2::new(T::of(r.x), T::of(r.y))).collect();
    let speeds = records.iter().map(|r| T::of(r.v)).collect();
    let headings = records.iter().map(|r| T::of(r.theta)).collect();
    let trajectory = Trajectory::with_kinematics(points, dt, speeds, headings)?;
    let log = EpisodeLog {
        scenario_id: scenario.id.clone(),
        policy_id: policy_label.to_string(),
        outcome,
        records,
    };
    Ok(EpisodeResult { outcome, steps, trajectory, total_reward, log })
}

fn record_of<T: Real>(world: &World<T>, ego: usize, step: u64) -> StepRecord {
    let s = &world.vehicles[ego].state;
    StepRecord {
        step,
        x: s.pos.x.to_f64_lossy(),
        y: s.pos.y.to_f64_lossy(),
        v: s.speed.to_f64_lossy(),
        theta: s.heading.to_f64_lossy(),
        phi: s.steer.to_f64_lossy(),
        accel: s.accel.to_f64_lossy(),
    }
}

/// Wrap a frozen snapshot as an agent factory for [`run_episode`].
pub fn snapshot_agent<T: Real>(
    snapshot: &PolicySnapshot<T>,
) -> impl FnMut() -> Box<dyn Controller<T>> + '_ {
    move || Box::new(QController::new(snapshot.net())) as Box<dyn Controller<T>>
}

/// Errors that mark a scenario as misconfigured rather than failed.
pub fn is_infeasible(err: &Error) -> bool {
    matches!(
        err,
        Error::NoCandidates | Error::InfeasibleReference { .. } | Error::EmptySuccessSet(_)
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{ORect, Segment, Vec2};
    use crate::sim::{Action, Arrow, Goal, Route, VehicleSpec, ZoneMap};
    use crate::trajlog::episodes_to_string;

    struct Hold;
    impl<T: Real> Controller<T> for Hold {
        fn act(
            &mut self,
            _obs: &crate::sim::Observation<T>,
            _view: &VehicleView<'_, T>,
        ) -> Command<T> {
            Command::Action(Action::Holding)
        }
    }

    fn lane_scenario(mode: Mode) -> Scenario<f64> {
        let map = ZoneMap {
            name: "lane".into(),
            walls: vec![
                Segment::new(Vec2::new(-5.0, 0.0), Vec2::new(80.0, 0.0)),
                Segment::new(Vec2::new(-5.0, 6.0), Vec2::new(80.0, 6.0)),
            ],
            routes: vec![Route {
                name: "ego".into(),
                arrows: vec![Arrow { start: Vec2::new(0.0, 3.0), end: Vec2::new(75.0, 3.0) }],
            }],
            zones: vec![],
            goals: vec![Goal {
                route: 0,
                rect: ORect::new(Vec2::new(32.0, 3.0), Vec2::new(2.0, 3.0), 0.0),
            }],
        };
        Scenario {
            id: "s000".into(),
            map,
            vehicles: vec![VehicleSpec {
                route: 0,
                start_arc: 2.0,
                start_speed: 0.0,
                perturb: 0.0,
                binding: PolicyBinding::Ego,
                ignore_ego: false,
            }],
            seed: 3,
            time_limit: 25.0,
            mode,
        }
    }

    #[test]
    fn parked_ego_times_out_at_250_steps() {
        let sc = lane_scenario(Mode::Eval);
        let mut agent = || Box::new(Hold) as Box<dyn Controller<f64>>;
        let r = run_episode(&sc, &mut agent, &RewardWeights::single_agent(), "hold").unwrap();
        assert_eq!(r.outcome, Outcome::Timeout);
        assert_eq!(r.steps, 250);
        assert_eq!(r.trajectory.len(), 251);
        assert_eq!(r.log.steps(), 250);
    }

    #[test]
    fn scripted_driver_reaches_goal_early() {
        let sc = lane_scenario(Mode::Eval);
        let mut agent = || Box::new(ScriptedFollower::default()) as Box<dyn Controller<f64>>;
        let r = run_episode(&sc, &mut agent, &RewardWeights::single_agent(), "scripted").unwrap();
        assert_eq!(r.outcome, Outcome::Goal);
        assert!(r.steps < 250, "goal at 30 m should be reached well under the limit");
        // The goal rectangle spans x in [30, 34]; the body (half length
        // 2.25) must touch it.
        let last = r.trajectory.points().last().unwrap();
        assert!(last.x > 27.0);
    }

    #[test]
    fn replay_is_byte_identical() {
        let sc = lane_scenario(Mode::Eval);
        let run = || {
            let mut agent = || Box::new(ScriptedFollower::default()) as Box<dyn Controller<f64>>;
            let r =
                run_episode(&sc, &mut agent, &RewardWeights::single_agent(), "scripted").unwrap();
            episodes_to_string(&[], &[r.log])
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn train_mode_ignores_the_goal() {
        let sc = lane_scenario(Mode::Train);
        let mut agent = || Box::new(ScriptedFollower::default()) as Box<dyn Controller<f64>>;
        let r = run_episode(&sc, &mut agent, &RewardWeights::single_agent(), "scripted").unwrap();
        assert_eq!(r.outcome, Outcome::Timeout);
        assert_eq!(r.steps, 250);
    }
}
