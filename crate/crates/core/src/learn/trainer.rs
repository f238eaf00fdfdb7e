//! Multi-session Q-learning on the traffic simulator.
//!
//! Sessions are independent learners, each owning its simulator, network,
//! replay, and RNG stream. Without the intrinsic-reward coupling they run
//! on parallel threads. With it, sessions exchange frozen parameter blobs
//! at a fixed step cadence and each stored reward gains a KL-divergence
//! bonus against the peers' latest published policies; the driver then
//! advances all sessions in lockstep so the published blobs every reader
//! sees are exactly the cadence-step versions and training stays bit
//! reproducible.

use crate::error::{Error, Result};
use crate::learn::net::{Adam, QNet, TdBatch, ACTION_DIM, PARAM_COUNT};
use crate::learn::replay::{ReplayBuffer, Transition};
use crate::learn::snapshot::PolicySnapshot;
use crate::scalar::Real;
use crate::seeds;
use crate::sim::{
    apply_action, compute_reward, Action, Command, Controller, Mode, RewardWeights, Scenario,
    ScriptedFollower, VehicleView, World, TRAIN_COLLISION_LIMIT,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Piecewise-linear schedule: moves from `start` to `end` over the first
/// `over_steps` steps, constant afterwards. Exact at both breakpoints.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub start: f64,
    pub end: f64,
    pub over_steps: u64,
}

impl Schedule {
    pub fn constant(v: f64) -> Self {
        Self { start: v, end: v, over_steps: 0 }
    }

    pub fn at(&self, step: u64) -> f64 {
        if step >= self.over_steps {
            self.end
        } else {
            self.start + (self.end - self.start) * (step as f64 / self.over_steps as f64)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainerConfig {
    pub total_steps: u64,
    pub snapshot_interval: u64,
    pub gamma: f64,
    pub learning_rate: f64,
    pub epsilon: Schedule,
    pub collision_weight: Schedule,
    pub move_weight: f64,
    pub angle_weight: f64,
    pub center_weight: f64,
    /// Environmental rewards are multiplied by this factor before storage;
    /// keeps Q magnitudes in a range the tanh network fits comfortably.
    pub reward_scale: f64,
    /// Intrinsic-reward weight (the KL bonus coefficient).
    pub alpha: f64,
    /// Sessions publish parameters to their peers every this many steps.
    pub exchange_interval: u64,
    pub replay_capacity: usize,
    pub batch_size: usize,
    pub target_sync: u64,
    /// Updates start once the replay holds this many transitions.
    pub learn_start: usize,
    /// Softmax temperature of the action distribution used by the KL bonus.
    pub dist_temperature: f64,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            total_steps: 3_000_000,
            snapshot_interval: 20_000,
            gamma: 0.99,
            learning_rate: 0.001,
            epsilon: Schedule { start: 1.0, end: 0.1, over_steps: 100_000 },
            collision_weight: Schedule { start: 0.0, end: 300.0, over_steps: 300_000 },
            move_weight: 100.0,
            angle_weight: 0.0,
            center_weight: 0.0,
            reward_scale: 1.0,
            alpha: 0.01,
            exchange_interval: 1_000,
            replay_capacity: 100_000,
            batch_size: 32,
            target_sync: 1_000,
            learn_start: 1_000,
            dist_temperature: 1.0,
        }
    }
}

impl TrainerConfig {
    fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Config("gamma must lie in (0, 1)".into()));
        }
        if self.total_steps == 0 || self.snapshot_interval == 0 {
            return Err(Error::Config("step counts must be positive".into()));
        }
        if self.batch_size == 0 || self.replay_capacity == 0 {
            return Err(Error::Config("replay settings must be positive".into()));
        }
        if self.exchange_interval == 0 || self.target_sync == 0 {
            return Err(Error::Config("sync intervals must be positive".into()));
        }
        if self.alpha < 0.0 {
            return Err(Error::Config("alpha must be non-negative".into()));
        }
        Ok(())
    }
}

/// Environmental reward plus the mean KL-divergence bonus against the
/// peers' action distributions at this observation. With no peers or a
/// zero weight the environmental reward passes through unchanged. The KL
/// term is clamped at zero against summation rounding, so the result is
/// never below `r_env`.
pub fn intrinsic_reward<T: Real>(
    r_env: T,
    own: &QNet<T>,
    peers: &[QNet<T>],
    obs: &[T],
    alpha: T,
    temperature: T,
) -> Result<T> {
    if peers.is_empty() || alpha == T::zero() {
        return Ok(r_env);
    }
    let own_dist = own.action_distribution_with_temperature(obs, temperature)?;
    let peer_dists: Vec<[T; ACTION_DIM]> = peers
        .iter()
        .map(|p| p.action_distribution_with_temperature(obs, temperature))
        .collect::<Result<_>>()?;
    Ok(intrinsic_reward_from_distributions(
        r_env,
        &own_dist,
        peer_dists.iter().map(|d| d.as_slice()),
        alpha,
    ))
}

/// The same bonus computed from prepared distributions.
pub fn intrinsic_reward_from_distributions<'a, T: Real>(
    r_env: T,
    own_dist: &[T],
    peer_dists: impl ExactSizeIterator<Item = &'a [T]>,
    alpha: T,
) -> T {
    let n = peer_dists.len();
    if n == 0 || alpha == T::zero() {
        return r_env;
    }
    let mut acc = T::zero();
    for peer in peer_dists {
        let kl = crate::learn::net::kl_divergence(own_dist, peer);
        acc += if kl > T::zero() { kl } else { T::zero() };
    }
    r_env + alpha * acc / T::from_usize(n).unwrap()
}

/// A frozen policy driving a vehicle: greedy argmax over the Q values.
pub struct QController<T> {
    net: QNet<T>,
}

impl<T: Real> QController<T> {
    pub fn new(net: QNet<T>) -> Self {
        Self { net }
    }
}

impl<T: Real> Controller<T> for QController<T> {
    fn act(&mut self, obs: &crate::sim::Observation<T>, _view: &VehicleView<'_, T>) -> Command<T> {
        Command::Action(self.net.act(&obs.flatten()).expect("observation has the contract length"))
    }
}

#[derive(Clone, Debug, Default)]
pub struct SessionStats {
    pub session: u32,
    pub steps: u64,
    pub episodes: u64,
    pub collisions: u64,
    /// Minimum of `reward_stored - reward_env` over all steps; non-negative
    /// whenever the intrinsic bonus is active (0 when it never was).
    pub min_intrinsic_bonus: f64,
    pub last_loss: f64,
}

struct SessionRunner<'a, T: Real> {
    cfg: &'a TrainerConfig,
    scenario: &'a Scenario<T>,
    session: u32,
    rng: ChaCha8Rng,
    net: QNet<T>,
    target: QNet<T>,
    adam: Adam<T>,
    replay: ReplayBuffer<T>,
    world: World<T>,
    scripted: Vec<Option<ScriptedFollower<T>>>,
    agents: Vec<usize>,
    learn_vehicle: usize,
    episode_steps: u64,
    episode_limit: u64,
    peers: Vec<QNet<T>>,
    dde: bool,
    snapshots: Vec<PolicySnapshot<T>>,
    grads: Vec<T>,
    stats: SessionStats,
}

impl<'a, T: Real> SessionRunner<'a, T> {
    fn new(
        cfg: &'a TrainerConfig,
        scenario: &'a Scenario<T>,
        session: u32,
        base_seed: u64,
        dde: bool,
    ) -> Result<Self> {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seeds::derive(base_seed, "train-session", session.into()));
        let net = QNet::new(seeds::derive(base_seed, "net-init", session.into()));
        let world = World::from_scenario(scenario, &mut rng)?;
        let scripted = scenario
            .vehicles
            .iter()
            .map(|v| match v.binding {
                crate::sim::PolicyBinding::Scripted => Some(ScriptedFollower::default()),
                _ => None,
            })
            .collect();
        let agents = scenario.agent_indices();
        let learn_vehicle = scenario.ego_index()?;
        Ok(Self {
            cfg,
            scenario,
            session,
            rng,
            target: net.clone(),
            adam: Adam::new(T::of(cfg.learning_rate), PARAM_COUNT),
            replay: ReplayBuffer::new(cfg.replay_capacity),
            world,
            scripted,
            agents,
            learn_vehicle,
            episode_steps: 0,
            episode_limit: scenario.time_limit_steps(),
            peers: Vec::new(),
            dde,
            snapshots: Vec::new(),
            grads: vec![T::zero(); PARAM_COUNT],
            net,
            stats: SessionStats {
                session,
                min_intrinsic_bonus: f64::INFINITY,
                ..SessionStats::default()
            },
        })
    }

    fn publish(&self) -> Arc<Vec<T>> {
        Arc::new(self.net.params().to_vec())
    }

    fn set_peers(&mut self, blobs: Vec<Arc<Vec<T>>>) {
        self.peers = blobs
            .into_iter()
            .map(|b| QNet::from_params(b.as_ref().clone()).expect("published params are valid"))
            .collect();
    }

    /// One environment step plus one learning update.
    fn step(&mut self, step: u64) -> Result<()> {
        let dt = T::of(crate::DT);
        let eps = self.cfg.epsilon.at(step - 1);
        let n = self.world.vehicles.len();

        let mut controls = Vec::with_capacity(n);
        let mut learn_obs: Option<Vec<T>> = None;
        let mut learn_q: Option<[T; ACTION_DIM]> = None;
        let mut learn_action = 0usize;
        for i in 0..n {
            let state = self.world.vehicles[i].state;
            let control = if self.agents.contains(&i) {
                let obs = self.world.observe(i).flatten();
                let q = self.net.forward(&obs)?;
                let action = if self.rng.random_range(0.0..1.0) < eps {
                    self.rng.random_range(0..ACTION_DIM)
                } else {
                    argmax(&q)
                };
                if i == self.learn_vehicle {
                    learn_obs = Some(obs);
                    learn_q = Some(q);
                    learn_action = action;
                }
                apply_action(&state, Action::from_index(action)?, dt)
            } else if let Some(f) = &mut self.scripted[i] {
                let view = VehicleView {
                    state: &state,
                    route: &self.world.map.routes[self.world.vehicles[i].route],
                    step: self.world.steps,
                };
                let obs = self.world.observe(i);
                match f.act(&obs, &view).clamped() {
                    Command::Direct { steer, accel } => (steer, accel),
                    Command::Action(a) => apply_action(&state, a, dt),
                }
            } else {
                (state.steer, state.accel)
            };
            controls.push(control);
        }

        let report = self.world.step(&controls);
        let lv = self.learn_vehicle;
        let weights = RewardWeights {
            movement: T::of(self.cfg.move_weight),
            collision: T::of(self.cfg.collision_weight.at(step - 1)),
            angle: T::of(self.cfg.angle_weight),
            center: T::of(self.cfg.center_weight),
        };
        let breakdown = compute_reward(
            &self.world.map,
            self.world.vehicles[lv].route,
            &report.prev_states[lv],
            &self.world.vehicles[lv].state,
            report.collided[lv],
            &weights,
        );
        if report.collided[lv] {
            self.stats.collisions += 1;
        }
        let r_env = T::of(self.cfg.reward_scale) * breakdown.total();
        let reward = if self.dde && !self.peers.is_empty() {
            let obs = learn_obs.as_deref().expect("learning vehicle is an agent");
            let temperature = T::of(self.cfg.dist_temperature);
            // Reuse the Q values already computed for action selection.
            let own_dist =
                softmax_cached(&learn_q.expect("q cached for the learning vehicle"), temperature);
            let peer_dists: Vec<[T; ACTION_DIM]> = self
                .peers
                .iter()
                .map(|p| p.action_distribution_with_temperature(obs, temperature))
                .collect::<Result<_>>()?;
            let r = intrinsic_reward_from_distributions(
                r_env,
                &own_dist,
                peer_dists.iter().map(|d| d.as_slice()),
                T::of(self.cfg.alpha),
            );
            let bonus = (r - r_env).to_f64_lossy();
            self.stats.min_intrinsic_bonus = self.stats.min_intrinsic_bonus.min(bonus);
            r
        } else {
            r_env
        };

        let next_obs = self.world.observe(lv).flatten();
        self.replay.push(Transition {
            obs: learn_obs.expect("learning vehicle observed").into_boxed_slice(),
            action: learn_action,
            reward,
            next_obs: next_obs.into_boxed_slice(),
            terminal: false,
        });

        if self.replay.len() >= self.cfg.learn_start.max(self.cfg.batch_size) {
            let idxs = self.replay.sample_indices(&mut self.rng, self.cfg.batch_size);
            let batch = TdBatch {
                obs: idxs.iter().map(|&i| &*self.replay.get(i).obs).collect(),
                actions: idxs.iter().map(|&i| self.replay.get(i).action).collect(),
                rewards: idxs.iter().map(|&i| self.replay.get(i).reward).collect(),
                next_obs: idxs.iter().map(|&i| &*self.replay.get(i).next_obs).collect(),
                terminal: idxs.iter().map(|&i| self.replay.get(i).terminal).collect(),
            };
            let loss =
                self.net
                    .td_loss_and_grad(&self.target, &batch, T::of(self.cfg.gamma), &mut self.grads)?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { session: self.session, step });
            }
            self.stats.last_loss = loss.to_f64_lossy();
            self.adam.step(self.net.params_mut(), &self.grads);
        }

        if step % self.cfg.target_sync == 0 {
            self.target = self.net.clone();
        }
        if step % self.cfg.snapshot_interval == 0 {
            self.snapshots.push(PolicySnapshot::new(&self.net, self.session, step));
        }

        self.episode_steps += 1;
        self.stats.steps = step;
        let too_many_collisions =
            self.world.vehicles[lv].collisions > TRAIN_COLLISION_LIMIT;
        if self.episode_steps >= self.episode_limit || too_many_collisions {
            self.world.reset(self.scenario, &mut self.rng);
            self.episode_steps = 0;
            self.stats.episodes += 1;
            // Multi-agent training learns from one vehicle, rotated each
            // episode.
            if self.agents.len() > 1 {
                let idx = (self.stats.episodes as usize) % self.agents.len();
                self.learn_vehicle = self.agents[idx];
            }
        }
        Ok(())
    }

    fn finish(self) -> (Vec<PolicySnapshot<T>>, SessionStats) {
        let mut stats = self.stats;
        if stats.min_intrinsic_bonus == f64::INFINITY {
            stats.min_intrinsic_bonus = 0.0; // the bonus never applied
        }
        (self.snapshots, stats)
    }
}

fn argmax<T: Real>(q: &[T; ACTION_DIM]) -> usize {
    let mut best = 0;
    for i in 1..ACTION_DIM {
        if q[i] > q[best] {
            best = i;
        }
    }
    best
}

fn softmax_cached<T: Real>(q: &[T; ACTION_DIM], temperature: T) -> [T; ACTION_DIM] {
    let mut max = q[0];
    for &v in &q[1..] {
        if v > max {
            max = v;
        }
    }
    let mut out = [T::zero(); ACTION_DIM];
    let mut sum = T::zero();
    for (o, &v) in out.iter_mut().zip(q.iter()) {
        *o = ((v - max) / temperature).exp();
        sum += *o;
    }
    for o in &mut out {
        *o /= sum;
    }
    out
}

/// Train `sessions` parallel learners on the scenario and return every
/// snapshot (ordered by session, then step) plus per-session statistics.
///
/// Training must use a `train`-mode scenario. With `dde` the stored reward
/// of every transition is the intrinsic reward against the peers' latest
/// exchanged parameters.
pub fn train_sessions<T: Real>(
    cfg: &TrainerConfig,
    scenario: &Scenario<T>,
    sessions: u32,
    dde: bool,
    base_seed: u64,
) -> Result<(Vec<PolicySnapshot<T>>, Vec<SessionStats>)> {
    cfg.validate()?;
    if sessions == 0 {
        return Err(Error::InvalidInput("need at least one session".into()));
    }
    if dde && sessions < 2 {
        return Err(Error::InvalidInput("the intrinsic reward needs at least 2 sessions".into()));
    }
    if scenario.mode != Mode::Train {
        return Err(Error::Config("training needs a train-mode scenario".into()));
    }

    let mut results: Vec<(Vec<PolicySnapshot<T>>, SessionStats)> =
        Vec::with_capacity(sessions as usize);

    if dde {
        let mut runners: Vec<SessionRunner<'_, T>> = (0..sessions)
            .map(|s| SessionRunner::new(cfg, scenario, s, base_seed, true))
            .collect::<Result<_>>()?;
        let exchange = |runners: &mut Vec<SessionRunner<'_, T>>| {
            let blobs: Vec<Arc<Vec<T>>> = runners.iter().map(SessionRunner::publish).collect();
            for (i, r) in runners.iter_mut().enumerate() {
                let peers: Vec<Arc<Vec<T>>> = blobs
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, b)| Arc::clone(b))
                    .collect();
                r.set_peers(peers);
            }
        };
        exchange(&mut runners);
        for step in 1..=cfg.total_steps {
            for r in &mut runners {
                r.step(step)?;
            }
            if step % cfg.exchange_interval == 0 {
                exchange(&mut runners);
            }
        }
        results.extend(runners.into_iter().map(SessionRunner::finish));
    } else {
        let outcome: Vec<Result<(Vec<PolicySnapshot<T>>, SessionStats)>> =
            std::thread::scope(|scope| {
                let handles: Vec<_> = (0..sessions)
                    .map(|s| {
                        scope.spawn(move || {
                            let mut runner = SessionRunner::new(cfg, scenario, s, base_seed, false)?;
                            for step in 1..=cfg.total_steps {
                                runner.step(step)?;
                            }
                            Ok(runner.finish())
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("session thread must not panic"))
                    .collect()
            });
        for r in outcome {
            results.push(r?);
        }
    }

    let mut snapshots = Vec::new();
    let mut stats = Vec::new();
    for (snaps, st) in results {
        snapshots.extend(snaps);
        stats.push(st);
    }
    Ok((snapshots, stats))
}
