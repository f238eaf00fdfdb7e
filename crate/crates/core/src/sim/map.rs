//! Zone maps: walls, navigation routes made of target arrows, reward zones,
//! and goal areas. Maps load from TOML files with all units in meters and
//! radians; the layout follows left-hand traffic.

use crate::error::{Error, Result};
use crate::geom::{ORect, Segment, Vec2};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// A directed segment of a navigation route. The end point is the reward
/// target of any zone bound to the arrow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arrow<T> {
    pub start: Vec2<T>,
    pub end: Vec2<T>,
}

impl<T: Real> Arrow<T> {
    pub fn as_segment(&self) -> Segment<T> {
        Segment::new(self.start, self.end)
    }

    pub fn target(&self) -> Vec2<T> {
        self.end
    }

    pub fn length(&self) -> T {
        self.start.dist(self.end)
    }

    pub fn direction(&self) -> Option<Vec2<T>> {
        (self.end - self.start).normalized()
    }

    pub fn angle(&self) -> T {
        (self.end - self.start).angle()
    }
}

/// An ordered chain of target arrows. Arc-length parameterization treats
/// the arrows as a connected polyline.
#[derive(Clone, Debug, PartialEq)]
pub struct Route<T> {
    pub name: String,
    pub arrows: Vec<Arrow<T>>,
}

impl<T: Real> Route<T> {
    pub fn segments(&self) -> impl Iterator<Item = Segment<T>> + '_ {
        self.arrows.iter().map(Arrow::as_segment)
    }

    pub fn total_length(&self) -> T {
        self.arrows.iter().fold(T::zero(), |acc, a| acc + a.length())
    }

    /// Point at arc length `s` along the arrow chain, clamped to the ends.
    pub fn point_at_arc(&self, s: T) -> Vec2<T> {
        let mut remaining = if s < T::zero() { T::zero() } else { s };
        for a in &self.arrows {
            let len = a.length();
            if remaining <= len {
                if len == T::zero() {
                    return a.start;
                }
                return a.start + (a.end - a.start) * (remaining / len);
            }
            remaining -= len;
        }
        self.arrows.last().map(|a| a.end).unwrap_or_else(Vec2::zero)
    }

    /// Unit tangent at arc length `s` (direction of the containing arrow).
    pub fn tangent_at_arc(&self, s: T) -> Vec2<T> {
        let mut remaining = if s < T::zero() { T::zero() } else { s };
        for a in &self.arrows {
            let len = a.length();
            if remaining <= len {
                if let Some(d) = a.direction() {
                    return d;
                }
            }
            remaining -= len;
        }
        self.arrows
            .last()
            .and_then(Arrow::direction)
            .unwrap_or_else(|| Vec2::new(T::one(), T::zero()))
    }

    /// Arc length of the point on the route closest to `p` (first match on
    /// ties).
    pub fn project_arc(&self, p: Vec2<T>) -> T {
        let mut best_arc = T::zero();
        let mut best_dist = T::infinity();
        let mut walked = T::zero();
        for a in &self.arrows {
            let seg = a.as_segment();
            let t = seg.closest_param(p);
            let q = seg.a + seg.delta() * t;
            let d = q.dist(p);
            if d < best_dist {
                best_dist = d;
                best_arc = walked + a.length() * t;
            }
            walked += a.length();
        }
        best_arc
    }

    /// Shortest distance from `p` to any arrow of the route.
    pub fn distance_to(&self, p: Vec2<T>) -> T {
        self.segments()
            .map(|s| s.distance_to_point(p))
            .fold(T::infinity(), |a, b| if b < a { b } else { a })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZoneKind {
    Straight,
    Intersection,
}

/// A reward zone bound to one target arrow of one route.
#[derive(Clone, Debug, PartialEq)]
pub struct Zone<T> {
    pub rect: ORect<T>,
    pub kind: ZoneKind,
    pub route: usize,
    pub arrow: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Goal<T> {
    pub route: usize,
    pub rect: ORect<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZoneMap<T> {
    pub name: String,
    pub walls: Vec<Segment<T>>,
    pub routes: Vec<Route<T>>,
    pub zones: Vec<Zone<T>>,
    pub goals: Vec<Goal<T>>,
}

impl<T: Real> ZoneMap<T> {
    pub fn goal_for_route(&self, route: usize) -> Option<&Goal<T>> {
        self.goals.iter().find(|g| g.route == route)
    }

    /// Zones of `route` whose rectangle contains `p`, intersection zones
    /// first, then by map order.
    pub fn zone_at(&self, route: usize, p: Vec2<T>) -> Option<&Zone<T>> {
        let mut found: Option<&Zone<T>> = None;
        for z in self.zones.iter().filter(|z| z.route == route && z.rect.contains(p)) {
            match (&found, z.kind) {
                (None, _) => found = Some(z),
                (Some(f), ZoneKind::Intersection) if f.kind == ZoneKind::Straight => {
                    found = Some(z)
                }
                _ => {}
            }
        }
        found
    }

    fn validate(&self) -> Result<()> {
        for (i, z) in self.zones.iter().enumerate() {
            let route = self
                .routes
                .get(z.route)
                .ok_or_else(|| Error::Config(format!("zone {i} references route {}", z.route)))?;
            if z.arrow >= route.arrows.len() {
                return Err(Error::Config(format!(
                    "zone {i} references arrow {} of route `{}`",
                    z.arrow, route.name
                )));
            }
        }
        for g in &self.goals {
            if g.route >= self.routes.len() {
                return Err(Error::Config(format!("goal references route {}", g.route)));
            }
        }
        for r in &self.routes {
            if r.arrows.is_empty() {
                return Err(Error::Config(format!("route `{}` has no arrows", r.name)));
            }
            if r.arrows.iter().any(|a| a.length() == T::zero()) {
                return Err(Error::Config(format!("route `{}` has a zero-length arrow", r.name)));
            }
        }
        Ok(())
    }

    pub fn from_file_spec(file: &MapFile) -> Result<Self> {
        let map = Self {
            name: file.name.clone(),
            walls: file
                .walls
                .iter()
                .map(|w| Segment::new(vec2_of(w.a), vec2_of(w.b)))
                .collect(),
            routes: file
                .routes
                .iter()
                .map(|r| Route {
                    name: r.name.clone(),
                    arrows: r
                        .arrows
                        .iter()
                        .map(|a| Arrow { start: vec2_of(a.a), end: vec2_of(a.b) })
                        .collect(),
                })
                .collect(),
            zones: file
                .zones
                .iter()
                .map(|z| {
                    Ok(Zone {
                        rect: rect_of(z.center, z.half_size, z.angle),
                        kind: match z.kind.as_str() {
                            "straight" => ZoneKind::Straight,
                            "intersection" => ZoneKind::Intersection,
                            other => {
                                return Err(Error::Config(format!("unknown zone kind `{other}`")))
                            }
                        },
                        route: z.route,
                        arrow: z.arrow,
                    })
                })
                .collect::<Result<_>>()?,
            goals: file
                .goals
                .iter()
                .map(|g| Goal { route: g.route, rect: rect_of(g.center, g.half_size, g.angle) })
                .collect(),
        };
        map.validate()?;
        Ok(map)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read map `{}`: {e}", path.display())))?;
        let file: MapFile = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("map `{}`: {e}", path.display())))?;
        Self::from_file_spec(&file)
    }
}

fn vec2_of<T: Real>(p: [f64; 2]) -> Vec2<T> {
    Vec2::new(T::of(p[0]), T::of(p[1]))
}

fn rect_of<T: Real>(center: [f64; 2], half: [f64; 2], angle: f64) -> ORect<T> {
    ORect::new(vec2_of(center), vec2_of(half), T::of(angle))
}

// On-disk schema (always f64; converted into the scalar type on load).

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapFile {
    pub name: String,
    #[serde(default)]
    pub walls: Vec<WallSpec>,
    pub routes: Vec<RouteSpec>,
    #[serde(default)]
    pub zones: Vec<ZoneSpec>,
    #[serde(default)]
    pub goals: Vec<GoalSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WallSpec {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RouteSpec {
    pub name: String,
    pub arrows: Vec<ArrowSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ArrowSpec {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZoneSpec {
    pub kind: String,
    pub route: usize,
    pub arrow: usize,
    pub center: [f64; 2],
    pub half_size: [f64; 2],
    #[serde(default)]
    pub angle: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GoalSpec {
    pub route: usize,
    pub center: [f64; 2],
    pub half_size: [f64; 2],
    #[serde(default)]
    pub angle: f64,
}
