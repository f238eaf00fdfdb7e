//! 2D geometry primitives: vectors, segments, oriented rectangles, ray
//! casting, and overlap tests.

use crate::scalar::Real;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Vec2<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    /// Unit vector at `angle` radians from the +x axis.
    #[inline]
    pub fn from_angle(angle: T) -> Self {
        Self::new(angle.cos(), angle.sin())
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// z component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn dist(self, o: Self) -> T {
        (self - o).norm()
    }

    /// Counter-clockwise perpendicular.
    #[inline]
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    #[inline]
    pub fn scale(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }

    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > T::zero() {
            Some(self.scale(T::one() / n))
        } else {
            None
        }
    }

    #[inline]
    pub fn angle(self) -> T {
        self.y.atan2(self.x)
    }

    /// Rotate by `angle` radians counter-clockwise.
    pub fn rotated(self, angle: T) -> Self {
        let (s, c) = (angle.sin(), angle.cos());
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl<T: Real> Add for Vec2<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Real> Sub for Vec2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Real> Mul<T> for Vec2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

impl<T: Real> Neg for Vec2<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Normalize an angle to (-pi, pi].
pub fn wrap_angle<T: Real>(a: T) -> T {
    let pi = T::of(std::f64::consts::PI);
    let two_pi = pi + pi;
    let mut r = a % two_pi;
    if r <= -pi {
        r += two_pi;
    } else if r > pi {
        r -= two_pi;
    }
    r
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment<T> {
    pub a: Vec2<T>,
    pub b: Vec2<T>,
}

impl<T: Real> Segment<T> {
    pub fn new(a: Vec2<T>, b: Vec2<T>) -> Self {
        Self { a, b }
    }

    #[inline]
    pub fn delta(&self) -> Vec2<T> {
        self.b - self.a
    }

    pub fn length(&self) -> T {
        self.delta().norm()
    }

    /// Shortest distance from `p` to the segment.
    pub fn distance_to_point(&self, p: Vec2<T>) -> T {
        self.closest_point(p).dist(p)
    }

    /// Closest point on the segment to `p`.
    pub fn closest_point(&self, p: Vec2<T>) -> Vec2<T> {
        let d = self.delta();
        let len_sq = d.norm_sq();
        if len_sq == T::zero() {
            return self.a;
        }
        let t = ((p - self.a).dot(d) / len_sq).clamp_to(T::zero(), T::one());
        self.a + d * t
    }

    /// Parameter `t` of the closest point, in [0, 1].
    pub fn closest_param(&self, p: Vec2<T>) -> T {
        let d = self.delta();
        let len_sq = d.norm_sq();
        if len_sq == T::zero() {
            return T::zero();
        }
        ((p - self.a).dot(d) / len_sq).clamp_to(T::zero(), T::one())
    }

    /// Do two segments intersect (including touching)?
    pub fn intersects(&self, other: &Segment<T>) -> bool {
        let d1 = self.delta();
        let d2 = other.delta();
        let denom = d1.cross(d2);
        let diff = other.a - self.a;
        if denom == T::zero() {
            // Parallel: overlap only if collinear.
            if diff.cross(d1) != T::zero() {
                return false;
            }
            let len_sq = d1.norm_sq();
            if len_sq == T::zero() {
                return self.a.dist(other.closest_point(self.a)) == T::zero();
            }
            let t0 = diff.dot(d1) / len_sq;
            let t1 = t0 + d2.dot(d1) / len_sq;
            let (lo, hi) = if t0 < t1 { (t0, t1) } else { (t1, t0) };
            hi >= T::zero() && lo <= T::one()
        } else {
            let t = diff.cross(d2) / denom;
            let u = diff.cross(d1) / denom;
            t >= T::zero() && t <= T::one() && u >= T::zero() && u <= T::one()
        }
    }
}

/// Cast a ray from `origin` along unit direction `dir` against a segment.
/// Returns the hit distance, if any.
pub fn ray_segment<T: Real>(origin: Vec2<T>, dir: Vec2<T>, seg: &Segment<T>) -> Option<T> {
    let e = seg.delta();
    let denom = dir.cross(e);
    if denom == T::zero() {
        return None; // parallel (collinear grazing treated as a miss)
    }
    let diff = seg.a - origin;
    let t = diff.cross(e) / denom;
    let u = diff.cross(dir) / denom;
    if t >= T::zero() && u >= T::zero() && u <= T::one() {
        Some(t)
    } else {
        None
    }
}

/// Oriented rectangle: center, half extents along the local axes, and the
/// rotation of the local x axis. Vehicle bodies use local x = forward.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ORect<T> {
    pub center: Vec2<T>,
    pub half: Vec2<T>,
    pub angle: T,
}

impl<T: Real> ORect<T> {
    pub fn new(center: Vec2<T>, half: Vec2<T>, angle: T) -> Self {
        Self { center, half, angle }
    }

    pub fn axes(&self) -> (Vec2<T>, Vec2<T>) {
        let ax = Vec2::from_angle(self.angle);
        (ax, ax.perp())
    }

    pub fn corners(&self) -> [Vec2<T>; 4] {
        let (ax, ay) = self.axes();
        let ex = ax * self.half.x;
        let ey = ay * self.half.y;
        [
            self.center + ex + ey,
            self.center - ex + ey,
            self.center - ex - ey,
            self.center + ex - ey,
        ]
    }

    pub fn edges(&self) -> [Segment<T>; 4] {
        let c = self.corners();
        [
            Segment::new(c[0], c[1]),
            Segment::new(c[1], c[2]),
            Segment::new(c[2], c[3]),
            Segment::new(c[3], c[0]),
        ]
    }

    pub fn contains(&self, p: Vec2<T>) -> bool {
        let local = (p - self.center).rotated(-self.angle);
        local.x.abs() <= self.half.x && local.y.abs() <= self.half.y
    }

    /// Separating-axis overlap test (touching counts as overlap).
    pub fn overlaps(&self, other: &ORect<T>) -> bool {
        let (a1, a2) = self.axes();
        let (b1, b2) = other.axes();
        for axis in [a1, a2, b1, b2] {
            let ra = self.half.x * a1.dot(axis).abs() + self.half.y * a2.dot(axis).abs();
            let rb = other.half.x * b1.dot(axis).abs() + other.half.y * b2.dot(axis).abs();
            let dist = (other.center - self.center).dot(axis).abs();
            if dist > ra + rb {
                return false;
            }
        }
        true
    }

    /// Does the rectangle touch or cross a segment?
    pub fn intersects_segment(&self, seg: &Segment<T>) -> bool {
        if self.contains(seg.a) || self.contains(seg.b) {
            return true;
        }
        self.edges().iter().any(|e| e.intersects(seg))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ray_hits_perpendicular_wall() {
        let wall = Segment::new(Vec2::new(10.0, -5.0), Vec2::new(10.0, 5.0));
        let d = ray_segment(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), &wall).unwrap();
        assert_eq!(d, 10.0);
    }

    #[test]
    fn ray_misses_behind() {
        let wall = Segment::new(Vec2::new(-10.0, -5.0), Vec2::new(-10.0, 5.0));
        assert!(ray_segment(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), &wall).is_none());
    }

    #[test]
    fn rect_contains_and_rotation() {
        let r = ORect::new(Vec2::new(1.0, 1.0), Vec2::new(2.0, 1.0), std::f64::consts::FRAC_PI_2);
        // Local x (half 2) now points along +y.
        assert!(r.contains(Vec2::new(1.0, 2.9)));
        assert!(!r.contains(Vec2::new(2.5, 1.0)));
        assert!(r.contains(Vec2::new(1.9, 1.0)));
    }

    #[test]
    fn sat_overlap_cases() {
        let a = ORect::new(Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0), 0.0);
        let b = ORect::new(Vec2::new(1.5, 0.0), Vec2::new(1.0, 1.0), 0.0);
        let c = ORect::new(Vec2::new(4.0, 0.0), Vec2::new(1.0, 1.0), 0.0);
        assert!(a.overlaps(&b));
        assert!(b.overlaps(&a));
        assert!(!a.overlaps(&c));
        // Rotated by 45 degrees the diagonal reaches sqrt(2), so a gap of 2.2
        // between centers still overlaps.
        let d = ORect::new(Vec2::new(2.2, 0.0), Vec2::new(1.0, 1.0), std::f64::consts::FRAC_PI_4);
        assert!(a.overlaps(&d));
    }

    #[test]
    fn segment_distance() {
        let s = Segment::new(Vec2::new(0.0, 0.0), Vec2::new(10.0, 0.0));
        assert_eq!(s.distance_to_point(Vec2::new(5.0, 3.0)), 3.0);
        assert_eq!(s.distance_to_point(Vec2::new(-4.0, 3.0)), 5.0);
    }

    #[test]
    fn wrap_angle_range() {
        let pi = std::f64::consts::PI;
        assert!((wrap_angle(3.0 * pi) - pi).abs() < 1e-12);
        assert!((wrap_angle(-3.0 * pi) - pi).abs() < 1e-12);
        assert_eq!(wrap_angle(0.25), 0.25);
    }
}
