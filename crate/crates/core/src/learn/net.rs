//! The Q-value approximator: a fully-connected 201 -> 64 -> 64 -> 9 network
//! with tanh hidden activations, hand-rolled forward/backward, and an
//! Adam-style first/second-moment optimizer.
//!
//! Raw observations mix distances in [0, 50] with control values around
//! [-1, 1]; a fixed (non-learned) diagonal input scaling brings every
//! component to roughly unit range before the first layer.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sim::Action;
use crate::sim::OBS_LEN;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const OBS_DIM: usize = OBS_LEN;
pub const HIDDEN_DIM: usize = 64;
pub const ACTION_DIM: usize = Action::COUNT;

const W1: usize = 0;
const B1: usize = W1 + HIDDEN_DIM * OBS_DIM;
const W2: usize = B1 + HIDDEN_DIM;
const B2: usize = W2 + HIDDEN_DIM * HIDDEN_DIM;
const W3: usize = B2 + HIDDEN_DIM;
const B3: usize = W3 + ACTION_DIM * HIDDEN_DIM;
pub const PARAM_COUNT: usize = B3 + ACTION_DIM;

/// Fixed input scale: ray distances by 1/50, history (v, a, phi) triples by
/// their control bounds.
fn input_scale<T: Real>(i: usize) -> T {
    if i < 192 {
        T::of(1.0 / 50.0)
    } else {
        match (i - 192) % 3 {
            0 => T::of(1.0 / 2.0),
            1 => T::one(),
            _ => T::of(1.0 / 0.785),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QNet<T> {
    params: Vec<T>,
}

/// Per-sample forward cache reused by the backward pass.
pub struct Cache<T> {
    scaled_in: Vec<T>,
    h1: Vec<T>,
    h2: Vec<T>,
    pub q: [T; ACTION_DIM],
}

impl<T: Real> QNet<T> {
    /// Xavier-uniform initialization under the given seed.
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = vec![T::zero(); PARAM_COUNT];
        let mut init = |lo: usize, hi: usize, fan_in: usize, fan_out: usize| {
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            #[allow(clippy::needless_range_loop)]
            for i in lo..hi {
                params[i] = T::of(rng.random_range(-bound..bound));
            }
        };
        init(W1, B1, OBS_DIM, HIDDEN_DIM);
        init(W2, B2, HIDDEN_DIM, HIDDEN_DIM);
        init(W3, B3, HIDDEN_DIM, ACTION_DIM);
        // Biases start at zero.
        Self { params }
    }

    pub fn from_params(params: Vec<T>) -> Result<Self> {
        if params.len() != PARAM_COUNT {
            return Err(Error::SnapshotFormat(format!(
                "expected {PARAM_COUNT} parameters, got {}",
                params.len()
            )));
        }
        Ok(Self { params })
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    fn check_obs(obs: &[T]) -> Result<()> {
        if obs.len() != OBS_DIM {
            return Err(Error::InvalidInput(format!(
                "observation must have {OBS_DIM} entries, got {}",
                obs.len()
            )));
        }
        Ok(())
    }

    pub fn forward_cached(&self, obs: &[T]) -> Result<Cache<T>> {
        Self::check_obs(obs)?;
        let p = &self.params;
        let mut scaled_in = vec![T::zero(); OBS_DIM];
        for (i, s) in scaled_in.iter_mut().enumerate() {
            *s = obs[i] * input_scale::<T>(i);
        }
        let mut h1 = vec![T::zero(); HIDDEN_DIM];
        for j in 0..HIDDEN_DIM {
            let row = W1 + j * OBS_DIM;
            let mut acc = p[B1 + j];
            for i in 0..OBS_DIM {
                acc += p[row + i] * scaled_in[i];
            }
            h1[j] = acc.tanh();
        }
        let mut h2 = vec![T::zero(); HIDDEN_DIM];
        for j in 0..HIDDEN_DIM {
            let row = W2 + j * HIDDEN_DIM;
            let mut acc = p[B2 + j];
            for i in 0..HIDDEN_DIM {
                acc += p[row + i] * h1[i];
            }
            h2[j] = acc.tanh();
        }
        let mut q = [T::zero(); ACTION_DIM];
        for (j, qj) in q.iter_mut().enumerate() {
            let row = W3 + j * HIDDEN_DIM;
            let mut acc = p[B3 + j];
            for i in 0..HIDDEN_DIM {
                acc += p[row + i] * h2[i];
            }
            *qj = acc;
        }
        Ok(Cache { scaled_in, h1, h2, q })
    }

    /// Q values for all nine actions.
    pub fn forward(&self, obs: &[T]) -> Result<[T; ACTION_DIM]> {
        Ok(self.forward_cached(obs)?.q)
    }

    /// Greedy action: argmax over action values, ties to the lowest index.
    pub fn act(&self, obs: &[T]) -> Result<Action> {
        let q = self.forward(obs)?;
        let mut best = 0;
        for i in 1..ACTION_DIM {
            if q[i] > q[best] {
                best = i;
            }
        }
        Action::from_index(best)
    }

    /// Softmax action distribution at the given temperature; entries are
    /// strictly positive and sum to one.
    pub fn action_distribution_with_temperature(
        &self,
        obs: &[T],
        temperature: T,
    ) -> Result<[T; ACTION_DIM]> {
        if !(temperature > T::zero()) {
            return Err(Error::InvalidInput("softmax temperature must be positive".into()));
        }
        let q = self.forward(obs)?;
        Ok(softmax(&q, temperature))
    }

    /// Softmax distribution at temperature 1.
    pub fn action_distribution(&self, obs: &[T]) -> Result<[T; ACTION_DIM]> {
        self.action_distribution_with_temperature(obs, T::one())
    }

    /// Accumulate gradients of `dL/dq` into `grads` (same layout as
    /// `params`).
    pub fn backward(&self, cache: &Cache<T>, dq: &[T; ACTION_DIM], grads: &mut [T]) {
        debug_assert_eq!(grads.len(), PARAM_COUNT);
        let p = &self.params;
        let mut dh2 = vec![T::zero(); HIDDEN_DIM];
        for j in 0..ACTION_DIM {
            let g = dq[j];
            if g == T::zero() {
                continue;
            }
            let row = W3 + j * HIDDEN_DIM;
            grads[B3 + j] += g;
            for i in 0..HIDDEN_DIM {
                grads[row + i] += g * cache.h2[i];
                dh2[i] += g * p[row + i];
            }
        }
        let mut dh1 = vec![T::zero(); HIDDEN_DIM];
        for j in 0..HIDDEN_DIM {
            // d tanh(x) = 1 - tanh(x)^2
            let g = dh2[j] * (T::one() - cache.h2[j] * cache.h2[j]);
            if g == T::zero() {
                continue;
            }
            let row = W2 + j * HIDDEN_DIM;
            grads[B2 + j] += g;
            for i in 0..HIDDEN_DIM {
                grads[row + i] += g * cache.h1[i];
                dh1[i] += g * p[row + i];
            }
        }
        for j in 0..HIDDEN_DIM {
            let g = dh1[j] * (T::one() - cache.h1[j] * cache.h1[j]);
            if g == T::zero() {
                continue;
            }
            let row = W1 + j * OBS_DIM;
            grads[B1 + j] += g;
            for i in 0..OBS_DIM {
                grads[row + i] += g * cache.scaled_in[i];
            }
        }
    }
}

fn softmax<T: Real>(q: &[T; ACTION_DIM], temperature: T) -> [T; ACTION_DIM] {
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

/// KL divergence `sum_i p_i ln(p_i / q_i)` with the `0 ln 0 = 0` convention.
pub fn kl_divergence<T: Real>(p: &[T], q: &[T]) -> T {
    debug_assert_eq!(p.len(), q.len());
    let mut sum = T::zero();
    for (&pi, &qi) in p.iter().zip(q.iter()) {
        if pi > T::zero() {
            sum += pi * (pi / qi).ln();
        }
    }
    sum
}

/// One-step TD batch. `next_q_online` / `next_q_target` are precomputed by
/// the trainer from the online and target networks.
pub struct TdBatch<'a, T> {
    pub obs: Vec<&'a [T]>,
    pub actions: Vec<usize>,
    pub rewards: Vec<T>,
    pub next_obs: Vec<&'a [T]>,
    pub terminal: Vec<bool>,
}

impl<T: Real> QNet<T> {
    /// Mean squared one-step TD loss with a double estimate target
    /// (`r + gamma * Q_target(o', argmax_a Q_online(o', a))`) and its
    /// gradient with respect to the online parameters.
    pub fn td_loss_and_grad(
        &self,
        target_net: &QNet<T>,
        batch: &TdBatch<'_, T>,
        gamma: T,
        grads: &mut [T],
    ) -> Result<T> {
        let n = batch.obs.len();
        if n == 0 {
            return Err(Error::InvalidInput("empty TD batch".into()));
        }
        for g in grads.iter_mut() {
            *g = T::zero();
        }
        let inv_n = T::one() / T::from_usize(n).unwrap();
        let mut loss = T::zero();
        for k in 0..n {
            let target = if batch.terminal[k] {
                batch.rewards[k]
            } else {
                let online_next = self.forward(batch.next_obs[k])?;
                let mut best = 0;
                for i in 1..ACTION_DIM {
                    if online_next[i] > online_next[best] {
                        best = i;
                    }
                }
                let target_next = target_net.forward(batch.next_obs[k])?;
                batch.rewards[k] + gamma * target_next[best]
            };
            let cache = self.forward_cached(batch.obs[k])?;
            let a = batch.actions[k];
            let diff = cache.q[a] - target;
            loss += diff * diff * inv_n;
            let mut dq = [T::zero(); ACTION_DIM];
            dq[a] = T::of(2.0) * diff * inv_n;
            self.backward(&cache, &dq, grads);
        }
        Ok(loss)
    }
}

/// Adam optimizer state over a flat parameter vector.
#[derive(Clone, Debug)]
pub struct Adam<T> {
    lr: T,
    beta1: T,
    beta2: T,
    eps: T,
    t: u64,
    m: Vec<T>,
    v: Vec<T>,
}

impl<T: Real> Adam<T> {
    pub fn new(lr: T, n: usize) -> Self {
        Self {
            lr,
            beta1: T::of(0.9),
            beta2: T::of(0.999),
            eps: T::of(1e-8),
            t: 0,
            m: vec![T::zero(); n],
            v: vec![T::zero(); n],
        }
    }

    pub fn step(&mut self, params: &mut [T], grads: &[T]) {
        debug_assert_eq!(params.len(), self.m.len());
        self.t += 1;
        let b1t = T::one() - self.beta1.powi(self.t as i32);
        let b2t = T::one() - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (T::one() - self.beta1) * grads[i];
            self.v[i] = self.beta2 * self.v[i] + (T::one() - self.beta2) * grads[i] * grads[i];
            let m_hat = self.m[i] / b1t;
            let v_hat = self.v[i] / b2t;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}
