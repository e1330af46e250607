use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use thiserror::Error;

use super::Dataset;
use crate::dynamics::{Dynamics, Real};
use crate::jet::Jet;
use crate::math;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrainError {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("hidden layer widths must be positive")]
    BadArchitecture,
    #[error("learning rate must be positive and finite")]
    BadLearningRate,
    #[error("loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
}

/// Fully connected network: tanh hidden layers, linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub dim: usize,
    /// Hidden widths only.
    pub layer_sizes: Vec<usize>,
    /// Per layer, row-major `out x in`.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    /// Inputs enter the network as `(x - input_shift) / input_scale`.
    pub input_shift: Vec<f64>,
    pub input_scale: Vec<f64>,
    /// Network outputs leave as `y * output_scale + output_shift`.
    pub output_shift: Vec<f64>,
    pub output_scale: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpConfig {
    pub layer_sizes: Vec<usize>,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
    /// Standardize inputs and targets with the dataset's mean and spread.
    pub normalize: bool,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            layer_sizes: vec![10, 5],
            epochs: 5000,
            lr: 1e-2,
            seed: 0,
            normalize: false,
        }
    }
}

/// A trained network and its full-data loss after every epoch.
#[derive(Debug, Clone)]
pub struct Trained {
    pub model: MlpModel,
    pub loss_history: Vec<f64>,
}

const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;
/// Epochs after which the step size has halved.
const LR_HALF_LIFE: f64 = 500.0;

impl MlpModel {
    /// Seeded initialization, uniform in `+-1/sqrt(fan_in)`.
    pub fn init(dim: usize, layer_sizes: &[usize], seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut widths = vec![dim];
        widths.extend_from_slice(layer_sizes);
        widths.push(dim);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in widths.windows(2) {
            let bound = 1.0 / math::sqrt(w[0] as f64);
            let u = Uniform::new_inclusive(-bound, bound).expect("finite bound");
            weights.push((0..w[0] * w[1]).map(|_| u.sample(&mut rng)).collect());
            biases.push((0..w[1]).map(|_| u.sample(&mut rng)).collect());
        }
        MlpModel {
            dim,
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
            input_shift: vec![0.0; dim],
            input_scale: vec![1.0; dim],
            output_shift: vec![0.0; dim],
            output_scale: vec![1.0; dim],
        }
    }

    fn width_in(&self, layer: usize) -> usize {
        if layer == 0 {
            self.dim
        } else {
            self.layer_sizes[layer - 1]
        }
    }

    pub fn forward<S: Real>(&self, x: &[S]) -> Vec<S> {
        let depth = self.weights.len();
        let mut a: Vec<S> = x
            .iter()
            .zip(self.input_shift.iter().zip(&self.input_scale))
            .map(|(v, (m, s))| v.offset(-m).scale(1.0 / s))
            .collect();
        for l in 0..depth {
            let n_in = self.width_in(l);
            let w = &self.weights[l];
            let mut next = Vec::with_capacity(self.biases[l].len());
            for (o, &b) in self.biases[l].iter().enumerate() {
                let row = &w[o * n_in..(o + 1) * n_in];
                let mut z = a[0].scale(row[0]).offset(b);
                for i in 1..n_in {
                    z = z + a[i].scale(row[i]);
                }
                next.push(if l + 1 < depth { z.tanh() } else { z });
            }
            a = next;
        }
        a.iter()
            .zip(self.output_shift.iter().zip(&self.output_scale))
            .map(|(v, (m, s))| v.scale(*s).offset(*m))
            .collect()
    }

    fn normalize_input(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.input_shift.iter().zip(&self.input_scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    /// Activations of every layer (normalized input included) for backprop.
    fn activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let depth = self.weights.len();
        let mut acts = vec![self.normalize_input(x)];
        for l in 0..depth {
            let n_in = self.width_in(l);
            let prev = &acts[l];
            let out: Vec<f64> = self.biases[l]
                .iter()
                .enumerate()
                .map(|(o, &b)| {
                    let row = &self.weights[l][o * n_in..(o + 1) * n_in];
                    let z = b + row.iter().zip(prev).map(|(w, a)| w * a).sum::<f64>();
                    if l + 1 < depth {
                        math::tanh(z)
                    } else {
                        z
                    }
                })
                .collect();
            acts.push(out);
        }
        acts
    }

    /// `d out_i / d x_j`, row-major `dim x dim`, by reverse-mode sweeps.
    pub fn input_jacobian(&self, x: &[f64]) -> Vec<f64> {
        let acts = self.activations(x);
        let n = self.dim;
        let mut jac = vec![0.0; n * n];
        for i in 0..n {
            let mut delta = vec![0.0; n];
            delta[i] = 1.0;
            let g = self.backward(&acts, delta, |_, _, _| {});
            for j in 0..n {
                jac[i * n + j] = g[j] * self.output_scale[i] / self.input_scale[j];
            }
        }
        jac
    }

    /// Propagates the output adjoint `delta` back to the input, calling
    /// `on_layer(l, delta_z, a_in)` with the pre-activation adjoint of each
    /// layer.
    fn backward(
        &self,
        acts: &[Vec<f64>],
        mut delta: Vec<f64>,
        mut on_layer: impl FnMut(usize, &[f64], &[f64]),
    ) -> Vec<f64> {
        let depth = self.weights.len();
        for l in (0..depth).rev() {
            if l + 1 < depth {
                for (d, a) in delta.iter_mut().zip(&acts[l + 1]) {
                    *d *= 1.0 - a * a;
                }
            }
            on_layer(l, &delta, &acts[l]);
            let n_in = self.width_in(l);
            let mut prev = vec![0.0; n_in];
            for (o, d) in delta.iter().enumerate() {
                let row = &self.weights[l][o * n_in..(o + 1) * n_in];
                for (p, w) in prev.iter_mut().zip(row) {
                    *p += d * w;
                }
            }
            delta = prev;
        }
        delta
    }

    /// Mean over pairs of the squared error norm.
    pub fn loss(&self, data: &Dataset) -> f64 {
        let sum: f64 = (0..data.len())
            .map(|i| math::dist_sq(&self.forward(data.input(i)), data.target(i)))
            .sum();
        sum / data.len() as f64
    }

    fn param_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>() + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    fn batch_gradient(&self, data: &Dataset, range: core::ops::Range<usize>, grad: &mut [Vec<f64>]) {
        for g in grad.iter_mut() {
            g.iter_mut().for_each(|v| *v = 0.0);
        }
        let scale = 2.0 / range.len() as f64;
        let depth = self.weights.len();
        for i in range {
            let acts = self.activations(data.input(i));
            let delta: Vec<f64> = acts[depth]
                .iter()
                .zip(data.target(i))
                .zip(self.output_shift.iter().zip(&self.output_scale))
                .map(|((y, t), (m, s))| scale * (y - (t - m) / s))
                .collect();
            self.backward(&acts, delta, |l, dz, a_in| {
                let n_in = a_in.len();
                let (gw, gb) = grad.split_at_mut(depth);
                for (o, d) in dz.iter().enumerate() {
                    for (j, a) in a_in.iter().enumerate() {
                        gw[l][o * n_in + j] += d * a;
                    }
                    gb[l][o] += d;
                }
            });
        }
    }
}

impl Dynamics for MlpModel {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.forward(x));
    }
    fn eval_jet(&self, x: &[Jet]) -> Option<Vec<Jet>> {
        Some(self.forward(x))
    }
}

/// Per-component mean and standard deviation of flat rows; a vanishing
/// spread is replaced by 1.
fn moments(flat: &[f64], dim: usize) -> (Vec<f64>, Vec<f64>) {
    let rows = (flat.len() / dim) as f64;
    let mut mean = vec![0.0; dim];
    for row in flat.chunks_exact(dim) {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v / rows;
        }
    }
    let mut var = vec![0.0; dim];
    for row in flat.chunks_exact(dim) {
        for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
            *s += (v - m) * (v - m) / rows;
        }
    }
    let scale = var
        .into_iter()
        .map(|v| if v > 1e-24 { math::sqrt(v) } else { 1.0 })
        .collect();
    (mean, scale)
}

/// Trains with one mini-batch per source trajectory, in order, using
/// adaptive per-parameter steps (second-moment scaling without momentum).
/// The step size decays as `lr / (1 + epoch / 500)`.
pub fn train_mlp(data: &Dataset, config: &MlpConfig) -> Result<Trained, TrainError> {
    if data.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    if config.layer_sizes.contains(&0) {
        return Err(TrainError::BadArchitecture);
    }
    if !(config.lr > 0.0) || !config.lr.is_finite() {
        return Err(TrainError::BadLearningRate);
    }
    let mut model = MlpModel::init(data.dim, &config.layer_sizes, config.seed);
    if config.normalize {
        (model.input_shift, model.input_scale) = moments(&data.inputs, data.dim);
        (model.output_shift, model.output_scale) = moments(&data.targets, data.dim);
    }
    let depth = model.weights.len();
    let mut grad: Vec<Vec<f64>> = model
        .weights
        .iter()
        .chain(&model.biases)
        .map(|v| vec![0.0; v.len()])
        .collect();
    let mut second: Vec<Vec<f64>> = grad.clone();
    let mut beta_pow = 1.0;
    let mut history = Vec::with_capacity(config.epochs);
    debug_assert_eq!(grad.iter().map(Vec::len).sum::<usize>(), model.param_count());
    for epoch in 0..config.epochs {
        let lr = config.lr / (1.0 + epoch as f64 / LR_HALF_LIFE);
        for range in &data.trajectories {
            if range.is_empty() {
                continue;
            }
            model.batch_gradient(data, range.clone(), &mut grad);
            beta_pow *= BETA2;
            let correction = 1.0 - beta_pow;
            for (p, (g, v)) in grad.iter().zip(second.iter_mut()).enumerate() {
                let params = if p < depth {
                    &mut model.weights[p]
                } else {
                    &mut model.biases[p - depth]
                };
                for ((w, g), v) in params.iter_mut().zip(g).zip(v.iter_mut()) {
                    *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                    *w -= lr * g / (math::sqrt(*v / correction) + EPS);
                }
            }
        }
        let loss = model.loss(data);
        if !loss.is_finite() {
            return Err(TrainError::NonFiniteLoss { epoch });
        }
        history.push(loss);
    }
    Ok(Trained {
        model,
        loss_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::JetSpace;

    fn linear_data() -> Dataset {
        let trajs: Vec<Vec<f64>> = [-2.0f64, -1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0]
            .iter()
            .map(|&x0| (0..100).map(|k| x0 * math::exp(-0.01 * k as f64)).collect())
            .collect();
        Dataset::from_trajectories(1, 0.01, trajs.iter().map(|t| t.as_slice()))
    }

    #[test]
    fn zero_epochs_is_initialization() {
        let cfg = MlpConfig {
            layer_sizes: vec![4, 3],
            epochs: 0,
            lr: 1e-2,
            seed: 9,
            normalize: false,
        };
        let t = train_mlp(&linear_data(), &cfg).unwrap();
        assert_eq!(t.model, MlpModel::init(1, &[4, 3], 9));
        assert!(t.loss_history.is_empty());
    }

    #[test]
    fn init_respects_fan_in_bound() {
        let m = MlpModel::init(3, &[7], 1);
        assert!(m.weights[0].iter().all(|w| w.abs() <= 1.0 / 3f64.sqrt()));
        assert!(m.weights[1].iter().all(|w| w.abs() <= 1.0 / 7f64.sqrt()));
        assert_eq!(m.weights[0].len(), 21);
        assert_eq!(m.biases[1].len(), 3);
    }

    #[test]
    fn learns_negative_identity() {
        let cfg = MlpConfig {
            layer_sizes: vec![1],
            epochs: 2000,
            lr: 1e-2,
            seed: 3,
            normalize: false,
        };
        let t = train_mlp(&linear_data(), &cfg).unwrap();
        // one tanh unit bends away from the line near |x| = 2
        for i in 0..=20 {
            let x = -1.0 + 0.1 * i as f64;
            let y = t.model.eval_vec(&[x])[0];
            assert!((y + x).abs() < 0.05, "x={x} y={y}");
        }
    }

    #[test]
    fn jacobian_matches_differences() {
        let m = MlpModel::init(3, &[6, 4], 5);
        let x = [0.3, -0.7, 1.1];
        let jac = m.input_jacobian(&x);
        let h = 1e-6;
        for j in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let (fp, fm) = (m.eval_vec(&xp), m.eval_vec(&xm));
            for i in 0..3 {
                assert!((jac[i * 3 + j] - (fp[i] - fm[i]) / (2.0 * h)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn normalized_jacobian_matches_differences() {
        let mut m = MlpModel::init(2, &[5], 8);
        m.input_shift = vec![1.0, -3.0];
        m.input_scale = vec![2.0, 0.5];
        m.output_shift = vec![10.0, 0.0];
        m.output_scale = vec![7.0, 0.1];
        let x = [0.2, -2.5];
        let jac = m.input_jacobian(&x);
        let h = 1e-6;
        for j in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let (fp, fm) = (m.eval_vec(&xp), m.eval_vec(&xm));
            for i in 0..2 {
                assert!((jac[i * 2 + j] - (fp[i] - fm[i]) / (2.0 * h)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn normalization_uses_data_moments() {
        let cfg = MlpConfig {
            layer_sizes: vec![2],
            epochs: 1,
            normalize: true,
            ..MlpConfig::default()
        };
        let data = linear_data();
        let t = train_mlp(&data, &cfg).unwrap();
        let mean = data.inputs.iter().sum::<f64>() / data.len() as f64;
        assert!((t.model.input_shift[0] - mean).abs() < 1e-12);
        assert!(t.model.output_scale[0] > 0.0);
    }

    #[test]
    fn jet_forward_matches_jacobian() {
        let m = MlpModel::init(2, &[5], 2);
        let x = [0.4, -0.2];
        let space = JetSpace::new(2, 1);
        let out = m.eval_jet(&Jet::seed(&space, &x)).unwrap();
        let jac = m.input_jacobian(&x);
        for i in 0..2 {
            assert!((out[i].value() - m.eval_vec(&x)[i]).abs() < 1e-14);
            for j in 0..2 {
                assert!((out[i].coeffs()[1 + j] - jac[i * 2 + j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn training_is_reproducible() {
        let cfg = MlpConfig {
            layer_sizes: vec![3],
            epochs: 20,
            lr: 1e-2,
            seed: 11,
            normalize: false,
        };
        let a = train_mlp(&linear_data(), &cfg).unwrap();
        let b = train_mlp(&linear_data(), &cfg).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.loss_history, b.loss_history);
    }
}
