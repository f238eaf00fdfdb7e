//! Vehicle-center trajectories and the average Euclidean distance between
//! two trajectories, the ground metric for all diversity measures.

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::scalar::Real;

/// A time-indexed sequence of 2D vehicle-center positions sampled at a
/// constant timestep, optionally carrying per-point speed and heading for
/// plotting. Never empty; coordinates are always finite.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    points: Vec<Vec2<T>>,
    timestep: T,
    speeds: Option<Vec<T>>,
    headings: Option<Vec<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn new(points: Vec<Vec2<T>>, timestep: T) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("trajectory must not be empty".into()));
        }
        if !(timestep > T::zero()) {
            return Err(Error::InvalidInput("trajectory timestep must be positive".into()));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidInput("trajectory contains non-finite coordinates".into()));
        }
        Ok(Self { points, timestep, speeds: None, headings: None })
    }

    pub fn with_kinematics(
        points: Vec<Vec2<T>>,
        timestep: T,
        speeds: Vec<T>,
        headings: Vec<T>,
    ) -> Result<Self> {
        if speeds.len() != points.len() || headings.len() != points.len() {
            return Err(Error::InvalidInput(
                "speed/heading length must match the point count".into(),
            ));
        }
        let mut t = Self::new(points, timestep)?;
        t.speeds = Some(speeds);
        t.headings = Some(headings);
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // enforced non-empty at construction
    }

    pub fn points(&self) -> &[Vec2<T>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> Vec2<T> {
        self.points[i]
    }

    pub fn timestep(&self) -> T {
        self.timestep
    }

    pub fn speeds(&self) -> Option<&[T]> {
        self.speeds.as_deref()
    }

    pub fn headings(&self) -> Option<&[T]> {
        self.headings.as_deref()
    }

    /// The trajectory shifted by a constant offset.
    pub fn translated(&self, offset: Vec2<T>) -> Self {
        let mut t = self.clone();
        for p in &mut t.points {
            *p = *p + offset;
        }
        t
    }

    /// All coordinates scaled by a constant factor.
    pub fn scaled(&self, factor: T) -> Self {
        let mut t = self.clone();
        for p in &mut t.points {
            *p = p.scale(factor);
        }
        t
    }
}

/// Average Euclidean distance between two trajectories over the first
/// `min(|a|, |b|)` points:
///
/// `(1/T) * sum_t ||a(t) - b(t)||`
///
/// Symmetric, non-negative, and zero exactly when the shared prefix
/// coincides. Trajectories from different scenarios must not be compared;
/// callers pair by scenario.
pub fn trajectory_distance<T: Real>(a: &Trajectory<T>, b: &Trajectory<T>) -> Result<T> {
    if a.timestep() != b.timestep() {
        return Err(Error::InvalidInput(format!(
            "mismatched trajectory timesteps: {} vs {}",
            a.timestep(),
            b.timestep()
        )));
    }
    let n = a.len().min(b.len());
    let mut sum = T::zero();
    for i in 0..n {
        sum += a.point(i).dist(b.point(i));
    }
    Ok(sum / T::from_usize(n).unwrap())
}
