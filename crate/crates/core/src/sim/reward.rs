//! The four-term environmental reward: movement progress, collision
//! penalty, heading alignment, and center-line proximity.

use crate::geom::wrap_angle;
use crate::scalar::Real;
use crate::sim::dynamics::VehicleState;
use crate::sim::map::{ZoneKind, ZoneMap};

/// Non-negative weight coefficients of the four reward terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewardWeights<T> {
    pub movement: T,
    pub collision: T,
    pub angle: T,
    pub center: T,
}

impl<T: Real> RewardWeights<T> {
    /// Single-agent experiment weights (alignment shaping off).
    pub fn single_agent() -> Self {
        Self { movement: T::of(100.0), collision: T::of(300.0), angle: T::zero(), center: T::zero() }
    }

    /// Multi-agent experiment weights.
    pub fn multi_agent() -> Self {
        Self {
            movement: T::of(100.0),
            collision: T::of(300.0),
            angle: T::of(15.0),
            center: T::of(5.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewardBreakdown<T> {
    pub movement: T,
    pub collision: T,
    pub angle: T,
    pub center: T,
}

impl<T: Real> RewardBreakdown<T> {
    pub fn total(&self) -> T {
        self.movement + self.collision + self.angle + self.center
    }
}

/// Reward for one step of the vehicle on `route`, judged by the zone that
/// contains the *new* center position.
///
/// - In an intersection zone the movement term pays for progress toward
///   the bound arrow's end point (never negative).
/// - In a straight zone it pays the travel projected on the arrow, which
///   can be negative when the vehicle recedes; the angle and center terms
///   apply only there and only while that progress is non-negative.
/// - Outside all zones only the collision term remains.
pub fn compute_reward<T: Real>(
    map: &ZoneMap<T>,
    route: usize,
    prev: &VehicleState<T>,
    new: &VehicleState<T>,
    collided: bool,
    weights: &RewardWeights<T>,
) -> RewardBreakdown<T> {
    let mut out = RewardBreakdown {
        movement: T::zero(),
        collision: if collided { -weights.collision } else { T::zero() },
        angle: T::zero(),
        center: T::zero(),
    };

    let zone = match map.zone_at(route, new.pos) {
        Some(z) => z,
        None => return out,
    };
    let arrow = &map.routes[zone.route].arrows[zone.arrow];

    match zone.kind {
        ZoneKind::Intersection => {
            let target = arrow.target();
            let before = prev.pos.dist(target);
            let after = new.pos.dist(target);
            let progress = before - after;
            out.movement = weights.movement * if progress > T::zero() { progress } else { T::zero() };
        }
        ZoneKind::Straight => {
            let dir = arrow.direction().unwrap_or_else(|| crate::geom::Vec2::new(T::one(), T::zero()));
            let projected = (new.pos - prev.pos).dot(dir);
            out.movement = weights.movement * projected;
            if out.movement >= T::zero() {
                let pi = T::of(std::f64::consts::PI);
                let omega = wrap_angle(new.heading - arrow.angle());
                let ratio = omega / pi;
                out.angle = weights.angle * (T::of(0.5) - ratio * ratio);
                let lateral = arrow.as_segment().distance_to_point(new.pos);
                out.center = weights.center
                    * (T::of(5.0) * (-T::of(8.0) * lateral * lateral).exp() - T::of(0.5));
            }
        }
    }
    out
}
