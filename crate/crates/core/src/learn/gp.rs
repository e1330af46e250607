use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use super::Dataset;
use crate::dynamics::{Dynamics, Real};
use crate::jet::Jet;
use crate::math;

/// Jitter added to the kernel diagonal, escalated on factorization failure.
pub const JITTERS: [f64; 3] = [1e-6, 1e-5, 1e-4];
/// Dense solves are limited to this many points.
pub const MAX_POINTS: usize = 2000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GpError {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("{0} points exceed the dense limit of {MAX_POINTS}")]
    TooLarge(usize),
    #[error("hyperparameters must be positive and finite")]
    BadHyper,
    #[error("kernel matrix not positive definite even with jitter {jitter}")]
    NotPositiveDefinite { jitter: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpHyper {
    pub lengthscale: f64,
    pub signal_var: f64,
    pub noise_var: f64,
}

impl Default for GpHyper {
    fn default() -> Self {
        GpHyper {
            lengthscale: 1.0,
            signal_var: 1.0,
            noise_var: 1e-2,
        }
    }
}

impl GpHyper {
    fn validate(&self) -> Result<(), GpError> {
        let ok = [self.lengthscale, self.signal_var]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite())
            && self.noise_var >= 0.0
            && self.noise_var.is_finite();
        if ok {
            Ok(())
        } else {
            Err(GpError::BadHyper)
        }
    }
}

/// Independent zero-mean GPs per output with a squared-exponential kernel;
/// evaluates to the posterior mean.
#[derive(Debug, Clone, PartialEq)]
pub struct GpModel {
    pub dim: usize,
    /// Flat row-major training inputs.
    pub inputs: Vec<f64>,
    /// Flat row-major training targets.
    pub targets: Vec<f64>,
    pub hyper: GpHyper,
    /// Jitter that made the factorization succeed.
    pub jitter: f64,
    /// Per output, `(K + (noise + jitter) I)^-1 y`.
    pub alpha: Vec<Vec<f64>>,
    pub log_marginal_likelihood: f64,
}

impl GpModel {
    pub fn len(&self) -> usize {
        self.inputs.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn kernel(&self, a: &[f64], b: &[f64]) -> f64 {
        kernel(&self.hyper, a, b)
    }

    pub fn posterior_mean<S: Real>(&self, x: &[S]) -> Vec<S> {
        let n = self.dim;
        let inv = -0.5 / (self.hyper.lengthscale * self.hyper.lengthscale);
        let mut out: Vec<S> = (0..n).map(|_| x[0].lift(0.0)).collect();
        for (i, xi) in self.inputs.chunks_exact(n).enumerate() {
            let mut r2 = x[0].offset(-xi[0]);
            r2 = r2.clone() * r2;
            for d in 1..n {
                let e = x[d].offset(-xi[d]);
                r2 = r2 + e.clone() * e;
            }
            let k = r2.scale(inv).exp().scale(self.hyper.signal_var);
            for (o, alpha) in out.iter_mut().zip(&self.alpha) {
                *o = o.clone() + k.scale(alpha[i]);
            }
        }
        out
    }

    /// Analytic `d mean_i / d x_j`, row-major `dim x dim`.
    pub fn mean_gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let l2 = self.hyper.lengthscale * self.hyper.lengthscale;
        let mut jac = alloc::vec![0.0; n * n];
        for (i, xi) in self.inputs.chunks_exact(n).enumerate() {
            let k = self.kernel(x, xi);
            for (o, alpha) in self.alpha.iter().enumerate() {
                for j in 0..n {
                    jac[o * n + j] -= alpha[i] * k * (x[j] - xi[j]) / l2;
                }
            }
        }
        jac
    }
}

fn kernel(h: &GpHyper, a: &[f64], b: &[f64]) -> f64 {
    h.signal_var * math::exp(-math::dist_sq(a, b) / (2.0 * h.lengthscale * h.lengthscale))
}

impl Dynamics for GpModel {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.posterior_mean(x));
    }
    fn eval_jet(&self, x: &[Jet]) -> Option<Vec<Jet>> {
        Some(self.posterior_mean(x))
    }
}

/// Fits with fixed hyperparameters.
pub fn fit_gp(data: &Dataset, hyper: GpHyper) -> Result<GpModel, GpError> {
    if data.is_empty() {
        return Err(GpError::EmptyDataset);
    }
    if data.len() > MAX_POINTS {
        return Err(GpError::TooLarge(data.len()));
    }
    hyper.validate()?;
    let n = data.dim;
    let p = data.len();
    let gram = DMatrix::from_fn(p, p, |i, j| kernel(&hyper, data.input(i), data.input(j)));
    let mut last = JITTERS[0];
    for &jitter in &JITTERS {
        last = jitter;
        let mut k = gram.clone();
        for i in 0..p {
            k[(i, i)] += hyper.noise_var + jitter;
        }
        let Some(chol) = k.cholesky() else { continue };
        let log_det: f64 = chol.l_dirty().diagonal().iter().map(|d| math::ln(*d)).sum::<f64>();
        let mut alpha = Vec::with_capacity(n);
        let mut lml = 0.0;
        for o in 0..n {
            let y = DVector::from_iterator(p, (0..p).map(|i| data.target(i)[o]));
            let a = chol.solve(&y);
            lml += -0.5 * y.dot(&a) - log_det - 0.5 * p as f64 * math::ln(2.0 * core::f64::consts::PI);
            alpha.push(a.iter().copied().collect());
        }
        return Ok(GpModel {
            dim: n,
            inputs: data.inputs.clone(),
            targets: data.targets.clone(),
            hyper,
            jitter,
            alpha,
            log_marginal_likelihood: lml,
        });
    }
    Err(GpError::NotPositiveDefinite { jitter: last })
}

/// Picks hyperparameters on a 3x3x3 log grid around `center` (each scaled by
/// 0.1, 1, 10) by marginal likelihood. Ties keep the earlier grid point.
pub fn fit_gp_grid(data: &Dataset, center: GpHyper) -> Result<GpModel, GpError> {
    let factors = [0.1, 1.0, 10.0];
    let mut best: Option<GpModel> = None;
    let mut first_err = None;
    for &fl in &factors {
        for &fs in &factors {
            for &fn_ in &factors {
                let h = GpHyper {
                    lengthscale: center.lengthscale * fl,
                    signal_var: center.signal_var * fs,
                    noise_var: center.noise_var * fn_,
                };
                match fit_gp(data, h) {
                    Ok(m) => {
                        if best
                            .as_ref()
                            .is_none_or(|b| m.log_marginal_likelihood > b.log_marginal_likelihood)
                        {
                            best = Some(m);
                        }
                    }
                    Err(e) => {
                        first_err.get_or_insert(e);
                    }
                }
            }
        }
    }
    best.ok_or_else(|| first_err.unwrap_or(GpError::EmptyDataset))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    fn tanh_data(points: usize) -> Dataset {
        let mut d = Dataset::from_trajectories(1, 1.0, core::iter::empty());
        for i in 0..points {
            let x = -3.0 + 6.0 * i as f64 / (points - 1) as f64;
            d.inputs.push(x);
            d.targets.push(-math::tanh(x));
        }
        d.trajectories.push(0..points);
        d
    }

    #[test]
    fn kernel_on_diagonal_is_signal_variance() {
        let g = fit_gp(&tanh_data(5), GpHyper { signal_var: 2.5, ..GpHyper::default() }).unwrap();
        assert_eq!(g.kernel(&[0.7], &[0.7]), 2.5);
    }

    #[test]
    fn interpolates_without_noise() {
        // the residual is jitter * alpha, so keep the points well separated
        let d = tanh_data(5);
        let g = fit_gp(&d, GpHyper { noise_var: 0.0, ..GpHyper::default() }).unwrap();
        for i in 0..d.len() {
            assert!((g.eval_vec(d.input(i))[0] - d.target(i)[0]).abs() < 1e-6);
        }
    }

    #[test]
    fn recovers_tanh() {
        let g = fit_gp(&tanh_data(200), GpHyper::default()).unwrap();
        for i in 0..=40 {
            let x = -2.0 + 0.1 * i as f64;
            assert!((g.eval_vec(&[x])[0] + math::tanh(x)).abs() < 0.05);
        }
    }

    #[test]
    fn gradient_matches_differences() {
        let g = fit_gp(&tanh_data(30), GpHyper::default()).unwrap();
        for x in [-1.5, 0.0, 0.3, 2.2] {
            let h = 1e-5;
            let fd = (g.eval_vec(&[x + h])[0] - g.eval_vec(&[x - h])[0]) / (2.0 * h);
            assert!((g.mean_gradient(&[x])[0] - fd).abs() < 1e-6);
        }
    }

    #[test]
    fn grid_never_worse_than_center() {
        let d = tanh_data(40);
        let center = fit_gp(&d, GpHyper::default()).unwrap();
        let best = fit_gp_grid(&d, GpHyper::default()).unwrap();
        assert!(best.log_marginal_likelihood >= center.log_marginal_likelihood);
    }

    #[test]
    fn duplicate_inputs_need_jitter() {
        let mut d = Dataset::from_trajectories(1, 1.0, core::iter::empty());
        let xs: Vec<f64> = vec![0.5; 4];
        d.inputs = xs.clone();
        d.targets = xs;
        d.trajectories.push(0..4);
        let g = fit_gp(&d, GpHyper { noise_var: 0.0, ..GpHyper::default() }).unwrap();
        assert!(JITTERS.contains(&g.jitter));
    }
}
