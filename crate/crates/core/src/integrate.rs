//! Fixed-step integration and noisy trajectory sampling.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::dynamics::Dynamics;
use crate::math;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrateError {
    #[error("invalid step: horizon {horizon} is not a positive integer multiple of dt {dt}")]
    InvalidStep { horizon: f64, dt: f64 },
    #[error("initial state has {got} components, field expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite state after sample {last_finite}")]
    BlowUp { last_finite: usize },
    #[error("noise intensity must be non-negative, got {0}")]
    NegativeNoise(f64),
}

/// Uniformly sampled states; sample `i` sits at `t0 + i * dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dim: usize,
    dt: f64,
    t0: f64,
    data: Vec<f64>,
}

impl Trajectory {
    pub fn new(dim: usize, dt: f64, t0: f64) -> Self {
        Trajectory {
            dim,
            dt,
            t0,
            data: Vec::new(),
        }
    }

    /// Builds a trajectory from row vectors. Panics if rows differ in length
    /// or there are none.
    pub fn from_states(states: &[Vec<f64>], dt: f64, t0: f64) -> Self {
        assert!(!states.is_empty(), "trajectory needs at least one state");
        let dim = states[0].len();
        let mut traj = Trajectory::new(dim, dt, t0);
        for s in states {
            traj.push(s);
        }
        traj
    }

    pub fn push(&mut self, state: &[f64]) {
        assert_eq!(state.len(), self.dim, "state dimension mismatch");
        self.data.extend_from_slice(state);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.data.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn states(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim.max(1))
    }

    pub fn last(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    /// Copy of samples `start..=end`, re-based to start at `time(start)`.
    pub fn slice(&self, start: usize, end: usize) -> Trajectory {
        Trajectory {
            dim: self.dim,
            dt: self.dt,
            t0: self.time(start),
            data: self.data[start * self.dim..(end + 1) * self.dim].to_vec(),
        }
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }
}

pub(crate) fn rk4_step(f: &dyn Dynamics, x: &[f64], dt: f64, scratch: &mut Rk4Scratch, out: &mut [f64]) {
    let n = x.len();
    let Rk4Scratch { k1, k2, k3, k4, tmp } = scratch;
    f.eval(x, k1);
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * dt * k1[i];
    }
    f.eval(tmp, k2);
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * dt * k2[i];
    }
    f.eval(tmp, k3);
    for i in 0..n {
        tmp[i] = x[i] + dt * k3[i];
    }
    f.eval(tmp, k4);
    for i in 0..n {
        out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

pub(crate) struct Rk4Scratch {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Scratch {
    pub(crate) fn new(n: usize) -> Self {
        Rk4Scratch {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }
}

/// Rolls out `steps` classical Runge-Kutta steps from `x0`.
pub(crate) fn rk4_steps(
    f: &dyn Dynamics,
    x0: &[f64],
    t0: f64,
    dt: f64,
    steps: usize,
) -> Result<Trajectory, IntegrateError> {
    let n = f.dim();
    if x0.len() != n {
        return Err(IntegrateError::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(IntegrateError::BlowUp { last_finite: 0 });
    }
    let mut traj = Trajectory::new(n, dt, t0);
    traj.data.reserve((steps + 1) * n);
    traj.push(x0);
    let mut scratch = Rk4Scratch::new(n);
    let mut x = x0.to_vec();
    let mut next = vec![0.0; n];
    for k in 0..steps {
        rk4_step(f, &x, dt, &mut scratch, &mut next);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(IntegrateError::BlowUp { last_finite: k });
        }
        traj.push(&next);
        core::mem::swap(&mut x, &mut next);
    }
    Ok(traj)
}

/// Integrates `x' = f(x)` from `x0` over `[t0, t0 + horizon]` with the
/// classical fourth-order Runge-Kutta method and fixed step `dt`.
///
/// Returns `horizon / dt + 1` samples including `x0`.
pub fn rk4(
    f: &dyn Dynamics,
    x0: &[f64],
    t0: f64,
    horizon: f64,
    dt: f64,
) -> Result<Trajectory, IntegrateError> {
    let steps = math::step_count(horizon, dt).ok_or(IntegrateError::InvalidStep { horizon, dt })?;
    rk4_steps(f, x0, t0, dt, steps)
}

/// Euler-Maruyama sampling of `dx = f(x) dt + sigma dW` with isotropic
/// additive noise. `sigma = 0` reproduces explicit Euler exactly.
pub fn sample_em(
    f: &dyn Dynamics,
    x0: &[f64],
    horizon: f64,
    dt: f64,
    sigma: f64,
    seed: u64,
) -> Result<Trajectory, IntegrateError> {
    if !(sigma >= 0.0) {
        return Err(IntegrateError::NegativeNoise(sigma));
    }
    let steps = math::step_count(horizon, dt).ok_or(IntegrateError::InvalidStep { horizon, dt })?;
    let n = f.dim();
    if x0.len() != n {
        return Err(IntegrateError::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise_scale = sigma * math::sqrt(dt);
    let mut traj = Trajectory::new(n, dt, 0.0);
    traj.push(x0);
    let mut x = x0.to_vec();
    let mut drift = vec![0.0; n];
    for k in 0..steps {
        f.eval(&x, &mut drift);
        for i in 0..n {
            x[i] += drift[i] * dt;
            if sigma > 0.0 {
                let xi: f64 = StandardNormal.sample(&mut rng);
                x[i] += noise_scale * xi;
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(IntegrateError::BlowUp { last_finite: k });
        }
        traj.push(&x);
    }
    Ok(traj)
}
