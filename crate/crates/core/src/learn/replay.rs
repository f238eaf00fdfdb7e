//! Uniform replay buffer (fixed-capacity ring).

use crate::scalar::Real;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct Transition<T> {
    pub obs: Box<[T]>,
    pub action: usize,
    pub reward: T,
    pub next_obs: Box<[T]>,
    pub terminal: bool,
}

#[derive(Clone, Debug)]
pub struct ReplayBuffer<T> {
    data: Vec<Transition<T>>,
    capacity: usize,
    write: usize,
}

impl<T: Real> ReplayBuffer<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self { data: Vec::with_capacity(capacity.min(1 << 16)), capacity, write: 0 }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn push(&mut self, t: Transition<T>) {
        if self.data.len() < self.capacity {
            self.data.push(t);
        } else {
            self.data[self.write] = t;
        }
        self.write = (self.write + 1) % self.capacity;
    }

    pub fn get(&self, i: usize) -> &Transition<T> {
        &self.data[i]
    }

    /// Uniform sample of `batch` indices, with replacement.
    pub fn sample_indices(&self, rng: &mut ChaCha8Rng, batch: usize) -> Vec<usize> {
        (0..batch).map(|_| rng.random_range(0..self.data.len())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn tr(v: f64) -> Transition<f64> {
        Transition {
            obs: vec![v].into_boxed_slice(),
            action: 0,
            reward: v,
            next_obs: vec![v].into_boxed_slice(),
            terminal: false,
        }
    }

    #[test]
    fn ring_overwrites_oldest() {
        let mut b = ReplayBuffer::new(3);
        for i in 0..5 {
            b.push(tr(i as f64));
        }
        assert_eq!(b.len(), 3);
        let rewards: Vec<f64> = (0..3).map(|i| b.get(i).reward).collect();
        // Slots 0 and 1 were overwritten by items 3 and 4.
        assert_eq!(rewards, vec![3.0, 4.0, 2.0]);
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let mut b = ReplayBuffer::new(10);
        for i in 0..10 {
            b.push(tr(i as f64));
        }
        let mut r1 = ChaCha8Rng::seed_from_u64(4);
        let mut r2 = ChaCha8Rng::seed_from_u64(4);
        assert_eq!(b.sample_indices(&mut r1, 6), b.sample_indices(&mut r2, 6));
    }
}
