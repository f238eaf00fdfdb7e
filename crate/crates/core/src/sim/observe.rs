//! Ray-cast observations: six distance types over 32 directions plus the
//! last three ego states, flattened to 201 values.

use crate::geom::{ray_segment, Segment, Vec2};
use crate::scalar::Real;
use crate::sim::world::World;

pub const RAY_COUNT: usize = 32;
pub const RAY_MAX: f64 = 50.0;
/// 6 ray blocks of 32 + 3 history triples.
pub const OBS_LEN: usize = 6 * RAY_COUNT + 9;

/// Six 32-direction distance vectors (capped at 50 m) and the last three
/// `(v, a, phi)` state triples, most recent first.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation<T> {
    pub walls: [T; RAY_COUNT],
    pub route_first: [T; RAY_COUNT],
    pub route_second: [T; RAY_COUNT],
    pub vehicles: [T; RAY_COUNT],
    pub straight_zones: [T; RAY_COUNT],
    pub intersection_zones: [T; RAY_COUNT],
    pub history: [(T, T, T); 3],
}

impl<T: Real> Observation<T> {
    pub fn flatten(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(OBS_LEN);
        for block in [
            &self.walls,
            &self.route_first,
            &self.route_second,
            &self.vehicles,
            &self.straight_zones,
            &self.intersection_zones,
        ] {
            out.extend_from_slice(block);
        }
        for &(v, a, phi) in &self.history {
            out.push(v);
            out.push(a);
            out.push(phi);
        }
        debug_assert_eq!(out.len(), OBS_LEN);
        out
    }
}

/// Minimum hit distance per ray against a set of segments, capped at 50 m.
fn cast_block<T: Real>(
    origin: Vec2<T>,
    dirs: &[Vec2<T>; RAY_COUNT],
    segments: impl Iterator<Item = Segment<T>>,
) -> [T; RAY_COUNT] {
    let cap = T::of(RAY_MAX);
    let mut out = [cap; RAY_COUNT];
    for seg in segments {
        for (i, &dir) in dirs.iter().enumerate() {
            if let Some(d) = ray_segment(origin, dir, &seg) {
                if d < out[i] {
                    out[i] = d;
                }
            }
        }
    }
    out
}

impl<T: Real> World<T> {
    /// Observation of vehicle `idx`: rays originate at the vehicle center,
    /// direction `i` is `heading + i * 2*pi/32` in the body frame.
    pub fn observe(&self, idx: usize) -> Observation<T> {
        let me = &self.vehicles[idx];
        let origin = me.state.pos;
        let mut dirs = [Vec2::zero(); RAY_COUNT];
        let step = T::of(2.0 * std::f64::consts::PI / RAY_COUNT as f64);
        for (i, d) in dirs.iter_mut().enumerate() {
            *d = Vec2::from_angle(me.state.heading + step * T::from_usize(i).unwrap());
        }

        let walls = cast_block(origin, &dirs, self.map.walls.iter().copied());

        // The two route polylines nearest to the vehicle center right now;
        // ties resolve to the lower route index.
        let mut route_order: Vec<usize> = (0..self.map.routes.len()).collect();
        route_order.sort_by(|&a, &b| {
            let da = self.map.routes[a].distance_to(origin);
            let db = self.map.routes[b].distance_to(origin);
            da.partial_cmp(&db).unwrap().then(a.cmp(&b))
        });
        let cap = [T::of(RAY_MAX); RAY_COUNT];
        let route_first = match route_order.first() {
            Some(&r) => cast_block(origin, &dirs, self.map.routes[r].segments()),
            None => cap,
        };
        let route_second = match route_order.get(1) {
            Some(&r) => cast_block(origin, &dirs, self.map.routes[r].segments()),
            None => cap,
        };

        // Other vehicles' body rectangles; a masked vehicle does not see
        // the ego.
        let vehicle_edges = self
            .vehicles
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != idx && !(me.ignore_ego && j == self.ego))
            .flat_map(|(_, v)| v.state.body().edges())
            .collect::<Vec<_>>();
        let vehicles = cast_block(origin, &dirs, vehicle_edges.iter().copied());

        let straight_edges = self
            .map
            .zones
            .iter()
            .filter(|z| z.kind == crate::sim::map::ZoneKind::Straight)
            .flat_map(|z| z.rect.edges())
            .collect::<Vec<_>>();
        let straight_zones = cast_block(origin, &dirs, straight_edges.iter().copied());

        let intersection_edges = self
            .map
            .zones
            .iter()
            .filter(|z| z.kind == crate::sim::map::ZoneKind::Intersection)
            .flat_map(|z| z.rect.edges())
            .collect::<Vec<_>>();
        let intersection_zones = cast_block(origin, &dirs, intersection_edges.iter().copied());

        Observation {
            walls,
            route_first,
            route_second,
            vehicles,
            straight_zones,
            intersection_zones,
            history: me.history,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::VehicleState;
    use crate::sim::map::{Arrow, Route, ZoneMap};
    use crate::sim::scenario::Mode;
    use crate::sim::world::VehicleRuntime;

    fn empty_map() -> ZoneMap<f64> {
        ZoneMap {
            name: "void".into(),
            walls: vec![],
            routes: vec![],
            zones: vec![],
            goals: vec![],
        }
    }

    fn runtime(state: VehicleState<f64>, ignore_ego: bool) -> VehicleRuntime<f64> {
        VehicleRuntime {
            state,
            route: 0,
            history: [(state.speed, 0.0, 0.0); 3],
            collisions: 0,
            ignore_ego,
            is_agent: false,
        }
    }

    fn world_with(map: ZoneMap<f64>, vehicles: Vec<VehicleRuntime<f64>>) -> World<f64> {
        World { map, vehicles, mode: Mode::Eval, ego: 0, steps: 0 }
    }

    #[test]
    fn open_field_reads_max_everywhere() {
        let w = world_with(
            empty_map(),
            vec![runtime(VehicleState::at_rest(Vec2::new(0.0, 0.0), 0.3), false)],
        );
        let obs = w.observe(0);
        let flat = obs.flatten();
        assert_eq!(flat.len(), OBS_LEN);
        assert!(flat[..192].iter().all(|&d| d == 50.0));
    }

    #[test]
    fn forward_ray_hits_wall_ahead() {
        let mut map = empty_map();
        map.walls.push(Segment::new(Vec2::new(10.0, -5.0), Vec2::new(10.0, 5.0)));
        let w = world_with(
            map,
            vec![runtime(VehicleState::at_rest(Vec2::new(0.0, 0.0), 0.0), false)],
        );
        let obs = w.observe(0);
        assert_eq!(obs.walls[0], 10.0);
        // The backward ray (index 16 with 32 rays) misses it.
        assert_eq!(obs.walls[16], 50.0);
    }

    #[test]
    fn rays_rotate_with_the_body_frame() {
        let mut map = empty_map();
        map.walls.push(Segment::new(Vec2::new(10.0, -5.0), Vec2::new(10.0, 5.0)));
        let w = world_with(
            map,
            vec![runtime(
                VehicleState::at_rest(Vec2::new(0.0, 0.0), std::f64::consts::FRAC_PI_2),
                false,
            )],
        );
        let obs = w.observe(0);
        // Heading +y: the wall sits a quarter turn clockwise, i.e. ray 24.
        assert_eq!(obs.walls[0], 50.0);
        assert!((obs.walls[24] - 10.0).abs() < 1e-9);
    }

    #[test]
    fn history_is_appended_after_rays() {
        let mut st = VehicleState::at_rest(Vec2::new(0.0, 0.0), 0.0);
        st.speed = 1.5;
        let mut rt = runtime(st, false);
        rt.history = [(1.5, 0.25, 0.1), (1.25, 0.5, 0.0), (1.0, 0.75, -0.1)];
        let w = world_with(empty_map(), vec![rt]);
        let flat = w.observe(0).flatten();
        assert_eq!(&flat[192..], &[1.5, 0.25, 0.1, 1.25, 0.5, 0.0, 1.0, 0.75, -0.1]);
    }

    #[test]
    fn vehicle_rays_and_ego_mask() {
        let ego = runtime(VehicleState::at_rest(Vec2::new(10.0, 0.0), 0.0), false);
        let mut other = runtime(VehicleState::at_rest(Vec2::new(0.0, 0.0), 0.0), false);
        other.state.heading = 0.0;
        let w = world_with(empty_map(), vec![ego.clone(), other.clone()]);
        // The other vehicle's forward ray starts at its center and meets the
        // ego's near face at x = 10 - 2.25.
        let seen = w.observe(1);
        assert!((seen.vehicles[0] - (10.0 - 2.25)).abs() < 1e-9);

        let mut masked = other;
        masked.ignore_ego = true;
        let w2 = world_with(empty_map(), vec![ego, masked]);
        let blind = w2.observe(1);
        assert_eq!(blind.vehicles[0], 50.0);
    }

    #[test]
    fn single_route_leaves_second_block_empty() {
        let mut map = empty_map();
        map.routes.push(Route {
            name: "r".into(),
            arrows: vec![Arrow { start: Vec2::new(-5.0, 2.0), end: Vec2::new(5.0, 2.0) }],
        });
        let w = world_with(
            map,
            vec![runtime(VehicleState::at_rest(Vec2::new(0.0, 0.0), 0.0), false)],
        );
        let obs = w.observe(0);
        // Ray pointing +y (index 8) hits the route line 2 m above.
        assert!((obs.route_first[8] - 2.0).abs() < 1e-9);
        assert!(obs.route_second.iter().all(|&d| d == 50.0));
    }
}
