use alloc::vec::Vec;
use core::ops::Range;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use thiserror::Error;

use crate::integrate::{sample_em, IntegrateError};
use crate::systems::SystemSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("need at least one trajectory and two samples per trajectory")]
    TooSmall,
    #[error("initial-point box has {got} intervals, system dimension is {dim}")]
    BoxMismatch { got: usize, dim: usize },
    #[error("invalid initial-point interval ({0}, {1})")]
    BadInterval(f64, f64),
    #[error("every trajectory failed; last error: {0}")]
    AllDropped(IntegrateError),
}

/// Input states and finite-difference derivative targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub dim: usize,
    pub dt: f64,
    /// Flat row-major states, `len * dim`.
    pub inputs: Vec<f64>,
    /// Flat row-major targets `(x_{k+1} - x_k) / dt`.
    pub targets: Vec<f64>,
    /// Pair index range of every kept trajectory.
    pub trajectories: Vec<Range<usize>>,
    /// Trajectories requested, including dropped ones.
    pub requested: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.inputs.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn target(&self, i: usize) -> &[f64] {
        &self.targets[i * self.dim..(i + 1) * self.dim]
    }

    /// Builds a dataset from already sampled trajectories (flat states).
    pub fn from_trajectories<'a>(dim: usize, dt: f64, trajs: impl IntoIterator<Item = &'a [f64]>) -> Self {
        let mut data = Dataset {
            dim,
            dt,
            inputs: Vec::new(),
            targets: Vec::new(),
            trajectories: Vec::new(),
            requested: 0,
        };
        for flat in trajs {
            data.push_trajectory(flat);
            data.requested += 1;
        }
        data
    }

    fn push_trajectory(&mut self, flat: &[f64]) {
        let n = self.dim;
        let start = self.len();
        for pair in 0..(flat.len() / n).saturating_sub(1) {
            let a = &flat[pair * n..(pair + 1) * n];
            let b = &flat[(pair + 1) * n..(pair + 2) * n];
            self.inputs.extend_from_slice(a);
            self.targets.extend(a.iter().zip(b).map(|(a, b)| (b - a) / self.dt));
        }
        self.trajectories.push(start..self.len());
    }
}

/// Samples `n_traj` noisy trajectories of `n_samples` states each from
/// initial points drawn uniformly in `x0_box`.
pub fn make_dataset(
    system: &SystemSpec,
    n_traj: usize,
    n_samples: usize,
    dt: f64,
    seed: u64,
    x0_box: &[(f64, f64)],
) -> Result<Dataset, DatasetError> {
    let dim = system.dynamics.dim();
    if n_traj == 0 || n_samples < 2 {
        return Err(DatasetError::TooSmall);
    }
    if x0_box.len() != dim {
        return Err(DatasetError::BoxMismatch { got: x0_box.len(), dim });
    }
    let dists = x0_box
        .iter()
        .map(|&(lo, hi)| Uniform::new_inclusive(lo, hi).map_err(|_| DatasetError::BadInterval(lo, hi)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let horizon = (n_samples - 1) as f64 * dt;
    let mut data = Dataset::from_trajectories(dim, dt, core::iter::empty());
    data.requested = n_traj;
    let mut last_err = None;
    for i in 0..n_traj {
        let x0: Vec<f64> = dists.iter().map(|d| d.sample(&mut rng)).collect();
        let noise_seed = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64 + 1);
        match sample_em(system.dynamics.as_ref(), &x0, horizon, dt, system.noise_sigma, noise_seed) {
            Ok(traj) => data.push_trajectory(traj.as_flat()),
            Err(e) => last_err = Some(e),
        }
    }
    if data.trajectories.is_empty() {
        return Err(DatasetError::AllDropped(last_err.expect("at least one trajectory was tried")));
    }
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::get_system;
    use alloc::vec;

    #[test]
    fn paper_sized_dataset() {
        let sys = get_system("tanh").unwrap();
        let d = make_dataset(&sys, 10, 100, 0.01, 7, &[(-3.0, 3.0)]).unwrap();
        assert_eq!(d.len(), 990);
        assert_eq!(d.trajectories.len(), 10);
        assert!(d.trajectories.iter().all(|r| r.len() == 99));
    }

    #[test]
    fn seeded_datasets_are_identical() {
        let sys = get_system("pendulum").unwrap();
        let a = make_dataset(&sys, 3, 20, 0.01, 42, &[(-1.0, 1.0), (-1.0, 1.0)]).unwrap();
        let b = make_dataset(&sys, 3, 20, 0.01, 42, &[(-1.0, 1.0), (-1.0, 1.0)]).unwrap();
        assert_eq!(a, b);
        let c = make_dataset(&sys, 3, 20, 0.01, 43, &[(-1.0, 1.0), (-1.0, 1.0)]).unwrap();
        assert_ne!(a.inputs, c.inputs);
    }

    #[test]
    fn no_pairs_across_trajectories() {
        let flat_a = [0.0, 1.0, 2.0];
        let flat_b = [10.0, 9.0];
        let d = Dataset::from_trajectories(1, 0.5, [&flat_a[..], &flat_b[..]]);
        assert_eq!(d.targets, vec![2.0, 2.0, -2.0]);
        assert_eq!(d.trajectories, vec![0..2, 2..3]);
    }

    #[test]
    fn rejects_bad_box() {
        let sys = get_system("tanh").unwrap();
        assert_eq!(
            make_dataset(&sys, 1, 10, 0.01, 0, &[(0.0, 1.0), (0.0, 1.0)]),
            Err(DatasetError::BoxMismatch { got: 2, dim: 1 })
        );
        assert_eq!(make_dataset(&sys, 1, 1, 0.01, 0, &[(0.0, 1.0)]), Err(DatasetError::TooSmall));
    }
}
