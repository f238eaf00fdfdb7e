//! Reference-trajectory generation: Brownian-bridge perturbations of a core
//! path, converted into dynamically feasible traces by a P-control vehicle
//! and kept only when the vehicle reaches the goal without colliding.

use crate::error::{Error, Result};
use crate::geom::{wrap_angle, Vec2};
use crate::scalar::Real;
use crate::seeds;
use crate::sim::{
    apply_action, Command, Controller, Mode, Scenario, ScriptedFollower, VehicleState, World,
};
use crate::trajectory::Trajectory;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// An arc-length-parameterized polyline with fixed start and end points;
/// the manually designed "expected" path the generator perturbs.
#[derive(Clone, Debug, PartialEq)]
pub struct CoreTrajectory<T> {
    points: Vec<Vec2<T>>,
    cum_arc: Vec<T>,
    /// Advisory traversal time at the design speed; generation derives the
    /// actual duration from the bridge base speed.
    pub nominal_duration: T,
}

impl<T: Real> CoreTrajectory<T> {
    pub fn new(points: Vec<Vec2<T>>, nominal_duration: T) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidInput("core trajectory needs at least 2 points".into()));
        }
        let mut cum_arc = Vec::with_capacity(points.len());
        let mut acc = T::zero();
        cum_arc.push(acc);
        for w in points.windows(2) {
            let d = w[0].dist(w[1]);
            if d == T::zero() {
                return Err(Error::InvalidInput(
                    "core trajectory arc length must be strictly increasing".into(),
                ));
            }
            acc += d;
            cum_arc.push(acc);
        }
        Ok(Self { points, cum_arc, nominal_duration })
    }

    /// Construct with the nominal duration implied by a base speed.
    pub fn with_base_speed(points: Vec<Vec2<T>>, base_speed: T) -> Result<Self> {
        if !(base_speed > T::zero()) {
            return Err(Error::InvalidInput("base speed must be positive".into()));
        }
        let mut core = Self::new(points, T::one())?;
        core.nominal_duration = core.arc_length() / base_speed;
        Ok(core)
    }

    pub fn points(&self) -> &[Vec2<T>] {
        &self.points
    }

    pub fn arc_length(&self) -> T {
        *self.cum_arc.last().unwrap()
    }

    fn segment_of(&self, s: T) -> usize {
        // Largest i with cum_arc[i] <= s (clamped into the polyline).
        let mut i = 0;
        while i + 2 < self.points.len() && self.cum_arc[i + 1] <= s {
            i += 1;
        }
        i
    }

    pub fn point_at(&self, s: T) -> Vec2<T> {
        let s = s.clamp_to(T::zero(), self.arc_length());
        let i = self.segment_of(s);
        let seg_len = self.cum_arc[i + 1] - self.cum_arc[i];
        let t = (s - self.cum_arc[i]) / seg_len;
        self.points[i] + (self.points[i + 1] - self.points[i]) * t
    }

    pub fn tangent_at(&self, s: T) -> Vec2<T> {
        let s = s.clamp_to(T::zero(), self.arc_length());
        let i = self.segment_of(s);
        (self.points[i + 1] - self.points[i]).normalized().expect("segments are non-degenerate")
    }

    /// Left unit normal at arc length `s`.
    pub fn normal_at(&self, s: T) -> Vec2<T> {
        self.tangent_at(s).perp()
    }

    /// Approximate curvature radius near each interior vertex:
    /// `min(adjacent segment lengths) / (2 sin(turn/2))`. Used only to flag
    /// lateral offsets large enough to fold the normal field.
    fn vertex_radii(&self) -> Vec<(T, T)> {
        let mut out = Vec::new();
        for i in 1..self.points.len() - 1 {
            let a = (self.points[i] - self.points[i - 1]).normalized().unwrap();
            let b = (self.points[i + 1] - self.points[i]).normalized().unwrap();
            let turn = wrap_angle(b.angle() - a.angle()).abs();
            if turn == T::zero() {
                continue;
            }
            let len_in = self.cum_arc[i] - self.cum_arc[i - 1];
            let len_out = self.cum_arc[i + 1] - self.cum_arc[i];
            let shorter = if len_in < len_out { len_in } else { len_out };
            let radius = shorter / (T::of(2.0) * (turn / T::of(2.0)).sin());
            out.push((self.cum_arc[i], radius));
        }
        out
    }
}

/// Turn a route-like polyline into a drivable core path by replacing each
/// interior corner with a circular fillet of (at most) the given radius,
/// sampled every `sample_step` meters of arc.
pub fn core_from_polyline<T: Real>(
    polyline: &[Vec2<T>],
    fillet_radius: T,
    sample_step: T,
    base_speed: T,
) -> Result<CoreTrajectory<T>> {
    if polyline.len() < 2 {
        return Err(Error::InvalidInput("polyline needs at least 2 points".into()));
    }
    if !(sample_step > T::zero()) {
        return Err(Error::InvalidInput("sample step must be positive".into()));
    }
    let mut points: Vec<Vec2<T>> = vec![polyline[0]];
    for i in 1..polyline.len() - 1 {
        let prev = polyline[i - 1];
        let here = polyline[i];
        let next = polyline[i + 1];
        let in_dir = (here - prev).normalized().ok_or_else(degenerate)?;
        let out_dir = (next - here).normalized().ok_or_else(degenerate)?;
        let turn = wrap_angle(out_dir.angle() - in_dir.angle());
        if turn.abs() < T::of(1e-9) {
            points.push(here);
            continue;
        }
        let half = turn.abs() / T::of(2.0);
        // Keep the tangent offset inside both adjacent segments.
        let max_offset = {
            let a = (here - prev).norm() * T::of(0.45);
            let b = (next - here).norm() * T::of(0.45);
            if a < b {
                a
            } else {
                b
            }
        };
        let radius = fillet_radius.min(max_offset / half.tan().max(T::of(1e-9)));
        let offset = radius * half.tan();
        let entry = here - in_dir * offset;
        // Arc center sits perpendicular to the incoming direction, on the
        // turning side; the final sample lands on the exit tangent point.
        let side = if turn > T::zero() { T::one() } else { -T::one() };
        let center = entry + in_dir.perp() * (radius * side);
        let start_angle = (entry - center).angle();
        let sweep = turn;
        let steps = ((radius * sweep.abs()) / sample_step)
            .ceil()
            .to_f64_lossy()
            .max(1.0) as usize;
        for k in 0..=steps {
            let frac = T::from_usize(k).unwrap() / T::from_usize(steps).unwrap();
            let ang = start_angle + sweep * frac;
            points.push(center + Vec2::from_angle(ang) * radius);
        }
    }
    points.push(*polyline.last().unwrap());
    points.dedup_by(|a, b| a.dist(*b) < T::of(1e-12));
    CoreTrajectory::with_base_speed(points, base_speed)
}

fn degenerate() -> Error {
    Error::InvalidInput("polyline has coincident consecutive points".into())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BridgeParams<T> {
    /// Lateral bridge scale (m per sqrt s).
    pub sigma_lateral: T,
    /// Longitudinal bridge scale (m per sqrt s).
    pub sigma_longitudinal: T,
    /// Base speed along the core (m/s); also fixes the traversal time.
    pub base_speed: T,
    /// Number of accepted traces the reference set should contain.
    pub count: usize,
}

impl<T: Real> Default for BridgeParams<T> {
    fn default() -> Self {
        Self {
            sigma_lateral: T::of(0.5),
            sigma_longitudinal: T::of(1.0),
            base_speed: T::of(1.2),
            count: 50,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PControlParams<T> {
    /// Lookahead horizon in seconds.
    pub lookahead: T,
    pub steer_gain: T,
    pub accel_gain: T,
}

impl<T: Real> Default for PControlParams<T> {
    fn default() -> Self {
        Self { lookahead: T::of(2.0), steer_gain: T::of(1.0), accel_gain: T::of(3.0) }
    }
}

/// A Brownian bridge sampled on `n_steps` evenly spaced points of
/// `[0, total_time]`: a scaled random walk with the linear correction
/// `W(t) - (t/T) W(T)`, so both endpoints are exactly zero.
pub fn brownian_bridge<T: Real>(
    n_steps: usize,
    total_time: T,
    sigma: T,
    seed: u64,
) -> Result<Vec<T>> {
    if n_steps < 2 {
        return Err(Error::InvalidInput("bridge needs at least 2 points".into()));
    }
    if !(total_time > T::zero()) {
        return Err(Error::InvalidInput("bridge duration must be positive".into()));
    }
    if sigma < T::zero() {
        return Err(Error::InvalidInput("bridge sigma must be non-negative".into()));
    }
    if sigma == T::zero() {
        return Ok(vec![T::zero(); n_steps]);
    }
    let dt = total_time.to_f64_lossy() / (n_steps - 1) as f64;
    let normal = Normal::new(0.0, sigma.to_f64_lossy() * dt.sqrt())
        .map_err(|e| Error::InvalidInput(format!("bad normal parameters: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut walk = Vec::with_capacity(n_steps);
    let mut acc = T::zero();
    walk.push(acc);
    for _ in 1..n_steps {
        acc += T::of(normal.sample(&mut rng));
        walk.push(acc);
    }
    let last = *walk.last().unwrap();
    let denom = T::from_usize(n_steps - 1).unwrap();
    Ok(walk
        .iter()
        .enumerate()
        // The ratio i/(n-1) is exactly 1 at the last point, pinning the
        // endpoint to zero in exact arithmetic.
        .map(|(i, &w)| w - last * (T::from_usize(i).unwrap() / denom))
        .collect())
}

/// A perturbed target trajectory plus a flag raised when some lateral
/// offset exceeds the local curvature radius of the core (the normal field
/// folds there and the offset geometry is unreliable).
#[derive(Clone, Debug)]
pub struct PerturbedTarget<T> {
    pub trajectory: Trajectory<T>,
    pub exceeds_curvature: bool,
}

/// Perturb the core with longitudinal and lateral Brownian bridges.
///
/// The longitudinal coordinate is `s(t) = (S/T) t + B_lo(t)`, clamped
/// monotone into `[0, S]` (the vehicle never tracks backwards along the
/// core); the traversal time is `T = S / base_speed`. The lateral offset
/// `B_la(t)` applies along the core's left normal. Both bridges pin to
/// zero at the ends, so the output's endpoints coincide with the core's.
pub fn perturb_core<T: Real>(
    core: &CoreTrajectory<T>,
    params: &BridgeParams<T>,
    seed: u64,
) -> Result<PerturbedTarget<T>> {
    if !(params.base_speed > T::zero()) {
        return Err(Error::InvalidInput("base speed must be positive".into()));
    }
    let arc = core.arc_length();
    let duration = arc / params.base_speed;
    let n = ((duration.to_f64_lossy() / crate::DT).round() as usize).max(1) + 1;
    let lon = brownian_bridge(n, duration, params.sigma_longitudinal, seeds::derive(seed, "lon", 0))?;
    let lat = brownian_bridge(n, duration, params.sigma_lateral, seeds::derive(seed, "lat", 0))?;

    let radii = core.vertex_radii();
    let denom = T::from_usize(n - 1).unwrap();
    let mut points = Vec::with_capacity(n);
    let mut s_prev = T::zero();
    let mut exceeds = false;
    for i in 0..n {
        let frac = T::from_usize(i).unwrap() / denom;
        let nominal = arc * frac + lon[i];
        let s = nominal.clamp_to(s_prev, arc);
        s_prev = s;
        let offset = lat[i];
        for &(vs, r) in &radii {
            if (s - vs).abs() <= offset.abs() && offset.abs() >= r {
                exceeds = true;
            }
        }
        points.push(core.point_at(s) + core.normal_at(s) * offset);
    }
    Ok(PerturbedTarget {
        trajectory: Trajectory::new(points, T::of(crate::DT))?,
        exceeds_curvature: exceeds,
    })
}

/// Why a conversion attempt produced no reference trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RejectReason {
    Collision,
    Timeout,
}

#[derive(Clone, Debug)]
pub enum Conversion<T> {
    Accepted(Trajectory<T>),
    Rejected(RejectReason),
}

/// Drive a vehicle under the simulator dynamics so that it mimics the
/// target trajectory: at step `t` it aims for the target point one
/// lookahead ahead, with `steer = w_phi sin(omega)` and
/// `accel = w_a |gap|/2 - v sin(omega)`. The trace is accepted only if the
/// vehicle reaches the scenario goal without collision within the time
/// limit; rejection is a normal outcome.
pub fn pcontrol_convert<T: Real>(
    target: &Trajectory<T>,
    params: &PControlParams<T>,
    scenario: &Scenario<T>,
) -> Result<Conversion<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let mut world = World::from_scenario(scenario, &mut rng)?;
    // Reference conversion always uses evaluation termination rules.
    world.mode = Mode::Eval;
    let ego = world.ego;
    if scenario.map.goal_for_route(world.vehicles[ego].route).is_none() {
        return Err(Error::Config("reference conversion needs a goal area".into()));
    }

    // Start at the target's head, heading along it.
    let pts = target.points();
    let heading = if pts.len() > 1 && pts[0].dist(pts[1]) > T::zero() {
        (pts[1] - pts[0]).angle()
    } else {
        world.vehicles[ego].state.heading
    };
    let v0 = if pts.len() > 1 {
        (pts[1].dist(pts[0]) / target.timestep()).clamp_to(T::zero(), T::of(crate::sim::SPEED_MAX))
    } else {
        T::zero()
    };
    world.vehicles[ego].state = VehicleState {
        pos: pts[0],
        heading,
        speed: v0,
        steer: T::zero(),
        accel: T::zero(),
    };
    let h0 = (v0, T::zero(), T::zero());
    world.vehicles[ego].history = [h0, h0, h0];

    let dt = T::of(crate::DT);
    let lookahead_steps = (params.lookahead.to_f64_lossy() / crate::DT).round() as usize;
    let limit = scenario.time_limit_steps();
    let mut scripted: Vec<Option<ScriptedFollower<T>>> = scenario
        .vehicles
        .iter()
        .map(|v| match v.binding {
            crate::sim::PolicyBinding::Scripted => Some(ScriptedFollower::default()),
            _ => None,
        })
        .collect();

    let mut trace = vec![world.vehicles[ego].state];
    for step in 0..limit {
        let n = world.vehicles.len();
        let mut controls = Vec::with_capacity(n);
        for i in 0..n {
            let state = world.vehicles[i].state;
            if i == ego {
                let idx = ((step as usize) + lookahead_steps).min(pts.len() - 1);
                let goal_pt = pts[idx];
                let gap = goal_pt - state.pos;
                let dist = gap.norm();
                let (steer, accel) = if dist == T::zero() {
                    (T::zero(), T::zero())
                } else {
                    let omega = wrap_angle(gap.angle() - state.heading);
                    (
                        params.steer_gain * omega.sin(),
                        params.accel_gain * dist / T::of(2.0) - state.speed * omega.sin(),
                    )
                };
                match (Command::Direct { steer, accel }).clamped() {
                    Command::Direct { steer, accel } => controls.push((steer, accel)),
                    Command::Action(_) => unreachable!(),
                }
            } else if let Some(f) = &mut scripted[i] {
                let view = crate::sim::VehicleView {
                    state: &state,
                    route: &world.map.routes[world.vehicles[i].route],
                    step: world.steps,
                };
                let obs = world.observe(i);
                match f.act(&obs, &view).clamped() {
                    Command::Direct { steer, accel } => controls.push((steer, accel)),
                    Command::Action(a) => controls.push(apply_action(&state, a, dt)),
                }
            } else {
                controls.push((state.steer, state.accel));
            }
        }
        let report = world.step(&controls);
        trace.push(world.vehicles[ego].state);
        if report.collided[ego] {
            return Ok(Conversion::Rejected(RejectReason::Collision));
        }
        if world.ego_in_goal() {
            let points = trace.iter().map(|s| s.pos).collect();
            let speeds = trace.iter().map(|s| s.speed).collect();
            let headings = trace.iter().map(|s| s.heading).collect();
            return Ok(Conversion::Accepted(Trajectory::with_kinematics(
                points,
                dt,
                speeds,
                headings,
            )?));
        }
    }
    Ok(Conversion::Rejected(RejectReason::Timeout))
}

#[derive(Clone, Debug, Default)]
pub struct GenStats {
    pub attempts: usize,
    pub accepted: usize,
    pub rejected_collision: usize,
    pub rejected_timeout: usize,
    pub curvature_flags: usize,
}

/// Repeat perturb-and-convert with per-attempt derived seeds until `count`
/// traces are accepted or the attempt cap (20x count) is hit. Deterministic
/// given the scenario seed. Zero acceptances is an error; a short set is
/// returned with its statistics for the caller to report.
pub fn generate_reference_set<T: Real>(
    scenario: &Scenario<T>,
    core: &CoreTrajectory<T>,
    bridge: &BridgeParams<T>,
    pcontrol: &PControlParams<T>,
) -> Result<(Vec<Trajectory<T>>, GenStats)> {
    if bridge.count == 0 {
        return Err(Error::InvalidInput("reference set size must be at least 1".into()));
    }
    let cap = bridge.count * 20;
    let mut out = Vec::with_capacity(bridge.count);
    let mut stats = GenStats::default();
    for attempt in 0..cap {
        if out.len() >= bridge.count {
            break;
        }
        stats.attempts += 1;
        let seed = seeds::derive(scenario.seed, "refgen-attempt", attempt as u64);
        let target = perturb_core(core, bridge, seed)?;
        if target.exceeds_curvature {
            stats.curvature_flags += 1;
        }
        match pcontrol_convert(&target.trajectory, pcontrol, scenario)? {
            Conversion::Accepted(t) => {
                out.push(t);
                stats.accepted += 1;
            }
            Conversion::Rejected(RejectReason::Collision) => stats.rejected_collision += 1,
            Conversion::Rejected(RejectReason::Timeout) => stats.rejected_timeout += 1,
        }
    }
    if out.is_empty() {
        return Err(Error::InfeasibleReference { attempts: stats.attempts });
    }
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn straight_core() -> CoreTrajectory<f64> {
        CoreTrajectory::with_base_speed(
            vec![Vec2::new(0.0, 0.0), Vec2::new(12.0, 0.0)],
            1.2,
        )
        .unwrap()
    }

    #[test]
    fn bridge_endpoints_are_exactly_zero() {
        for seed in 0..20 {
            let b = brownian_bridge::<f64>(101, 10.0, 1.0, seed).unwrap();
            assert_eq!(b[0], 0.0);
            assert_eq!(b[100], 0.0);
            assert!(b.iter().any(|&v| v != 0.0));
        }
    }

    #[test]
    fn zero_sigma_bridge_is_identically_zero() {
        let b = brownian_bridge::<f64>(50, 5.0, 0.0, 1).unwrap();
        assert!(b.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn bridge_variance_matches_theory() {
        // Var B(t) = sigma^2 t (T - t) / T; at the midpoint sigma^2 T / 4.
        let n = 101;
        let t_total = 8.0;
        let sigma = 0.7f64;
        let samples = 10_000;
        let mut acc = 0.0;
        for seed in 0..samples {
            let b = brownian_bridge::<f64>(n, t_total, sigma, seed).unwrap();
            let mid = b[n / 2];
            acc += mid * mid;
        }
        let var = acc / samples as f64;
        let expect = sigma * sigma * t_total / 4.0;
        assert!(
            (var - expect).abs() / expect < 0.05,
            "measured {var}, expected {expect}"
        );
    }

    #[test]
    fn zero_sigma_perturbation_traverses_core_at_constant_speed() {
        let core = straight_core();
        let params = BridgeParams {
            sigma_lateral: 0.0,
            sigma_longitudinal: 0.0,
            base_speed: 1.2,
            count: 1,
        };
        let out = perturb_core(&core, &params, 3).unwrap();
        assert!(!out.exceeds_curvature);
        let pts = out.trajectory.points();
        // 12 m at 1.2 m/s = 10 s = 100 steps + initial point.
        assert_eq!(pts.len(), 101);
        assert_eq!(pts[0], Vec2::new(0.0, 0.0));
        assert_eq!(*pts.last().unwrap(), Vec2::new(12.0, 0.0));
        for (i, p) in pts.iter().enumerate() {
            assert!((p.x - 0.12 * i as f64).abs() < 1e-9);
            assert_eq!(p.y, 0.0);
        }
    }

    #[test]
    fn perturbed_endpoints_always_coincide_with_core() {
        let core = straight_core();
        let params = BridgeParams::<f64>::default();
        for seed in 0..10 {
            let out = perturb_core(&core, &params, seed).unwrap();
            let pts = out.trajectory.points();
            assert_eq!(pts[0], Vec2::new(0.0, 0.0));
            assert_eq!(*pts.last().unwrap(), Vec2::new(12.0, 0.0));
        }
    }

    #[test]
    fn distinct_seeds_give_distinct_targets() {
        let core = straight_core();
        let params = BridgeParams::<f64>::default();
        let a = perturb_core(&core, &params, 1).unwrap().trajectory;
        let b = perturb_core(&core, &params, 2).unwrap().trajectory;
        let d = crate::trajectory::trajectory_distance(&a, &b).unwrap();
        assert!(d > 0.0);
    }

    #[test]
    fn longitudinal_clamp_is_monotone() {
        let core = straight_core();
        let params = BridgeParams {
            sigma_lateral: 0.0,
            sigma_longitudinal: 3.0, // violent speed noise
            base_speed: 1.2,
            count: 1,
        };
        for seed in 0..5 {
            let out = perturb_core(&core, &params, seed).unwrap();
            let xs: Vec<f64> = out.trajectory.points().iter().map(|p| p.x).collect();
            for w in xs.windows(2) {
                assert!(w[1] >= w[0] - 1e-12, "arc position went backwards");
            }
        }
    }

    #[test]
    fn fillet_core_is_smooth_and_hits_endpoints() {
        let poly = vec![Vec2::new(0.0, 0.0), Vec2::new(10.0, 0.0), Vec2::new(10.0, 10.0)];
        let core = core_from_polyline(&poly, 4.0, 0.5, 1.2).unwrap();
        assert_eq!(core.points()[0], poly[0]);
        assert_eq!(*core.points().last().unwrap(), poly[2]);
        // The corner itself is cut.
        assert!(core.points().iter().all(|p| p.dist(Vec2::new(10.0, 0.0)) > 0.5));
        // Arc length is shorter than the sharp corner path.
        assert!(core.arc_length() < 20.0);
        assert!(core.arc_length() > 18.0);
    }

    #[test]
    fn curvature_flag_raises_on_extreme_lateral_noise() {
        let poly = vec![Vec2::new(0.0, 0.0), Vec2::new(6.0, 0.0), Vec2::new(6.0, 6.0)];
        let core = core_from_polyline(&poly, 1.0, 0.3, 1.2).unwrap();
        let params = BridgeParams {
            sigma_lateral: 6.0,
            sigma_longitudinal: 0.0,
            base_speed: 1.2,
            count: 1,
        };
        let flagged = (0..50).any(|seed| perturb_core(&core, &params, seed).unwrap().exceeds_curvature);
        assert!(flagged, "extreme lateral noise should trip the curvature flag");
    }
}
