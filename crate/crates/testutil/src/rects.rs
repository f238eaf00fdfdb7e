//! Dense-sampling oracle for oriented-rectangle overlap, checking the
//! production separating-axis test from the opposite direction: sample a
//! grid of points inside each rectangle and test membership in the other.

#[derive(Clone, Copy, Debug)]
pub struct OrientedRect {
    pub cx: f64,
    pub cy: f64,
    pub half_w: f64,
    pub half_h: f64,
    pub angle: f64,
}

impl OrientedRect {
    fn contains(&self, x: f64, y: f64) -> bool {
        let (s, c) = self.angle.sin_cos();
        let dx = x - self.cx;
        let dy = y - self.cy;
        let lx = c * dx + s * dy;
        let ly = -s * dx + c * dy;
        lx.abs() <= self.half_w && ly.abs() <= self.half_h
    }

    fn sample_points(&self, per_axis: usize) -> Vec<(f64, f64)> {
        let (s, c) = self.angle.sin_cos();
        let mut out = Vec::with_capacity(per_axis * per_axis);
        for i in 0..per_axis {
            for j in 0..per_axis {
                let fx = (i as f64 / (per_axis - 1) as f64) * 2.0 - 1.0;
                let fy = (j as f64 / (per_axis - 1) as f64) * 2.0 - 1.0;
                let lx = fx * self.half_w;
                let ly = fy * self.half_h;
                out.push((self.cx + c * lx - s * ly, self.cy + s * lx + c * ly));
            }
        }
        out
    }

    /// Overlap by dense point sampling. With `per_axis` around 60 this
    /// resolves gaps down to a few percent of the rectangle size, which is
    /// why callers should skip near-touching cases (the production test is
    /// exact there, the sampler is not).
    pub fn overlaps_sampled(&self, other: &OrientedRect, per_axis: usize) -> bool {
        self.sample_points(per_axis).iter().any(|&(x, y)| other.contains(x, y))
            || other.sample_points(per_axis).iter().any(|&(x, y)| self.contains(x, y))
    }
}
