//! Randomized perturbation suites for the error-transfer inequalities.
//!
//! The base field is `f(x) = -tanh(x)`. A perturbation is
//! `f^ = f + eps * g` with `g` a cubic with coefficients drawn from
//! `U[-1, 1]`.

use std::sync::Arc;

use licds_core::theorems::{check_theorem1, check_theorem2};
use licds_core::{get_system, Dynamics, LocalModel, MonomialBasis};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use serde::Serialize;

use crate::error::CliError;

/// `f + eps * g`.
pub struct Perturbed {
    pub base: Arc<dyn Dynamics>,
    pub g: LocalModel,
    pub eps: f64,
}

impl Dynamics for Perturbed {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn eval(&self, x: &[f64], out: &mut [f64]) {
        self.base.eval(x, out);
        let g = self.g.eval_vec(x);
        for (o, gi) in out.iter_mut().zip(g) {
            *o += self.eps * gi;
        }
    }
}

/// A random polynomial of degree at most 3 around the origin.
pub fn random_cubic(rng: &mut ChaCha8Rng) -> LocalModel {
    let coeff = Uniform::new_inclusive(-1.0, 1.0).expect("valid interval");
    let coeffs = (0..4).map(|_| coeff.sample(rng)).collect();
    LocalModel::new(vec![0.0], MonomialBasis::new(1, 4), coeffs)
}

#[derive(Debug, Clone, Serialize)]
pub struct Theorem1Row {
    pub x0: f64,
    pub horizon: f64,
    pub eps: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Theorem1Report {
    pub instances: usize,
    pub passed: usize,
    /// Largest `lhs / rhs` over instances with `rhs > 0`.
    pub worst_ratio: f64,
    pub rows: Vec<Theorem1Row>,
}

/// `instances` draws of `x0 ~ U[-1, 1]`, `eps ~ U[0, max_eps]`, horizon
/// alternating 1 and 2.
pub fn theorem1_suite(instances: usize, seed: u64, max_eps: f64, dt: f64) -> Result<Theorem1Report, CliError> {
    if !(max_eps >= 0.0) || !max_eps.is_finite() {
        return Err(CliError::Config(format!("max eps must be finite and non-negative, got {max_eps}")));
    }
    let base = get_system("tanh")?.dynamics;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Uniform::new_inclusive(-1.0, 1.0).expect("valid interval");
    let mut rows = Vec::with_capacity(instances);
    for i in 0..instances {
        let g = random_cubic(&mut rng);
        let x0 = unit.sample(&mut rng);
        let eps = max_eps * 0.5 * (1.0 + unit.sample(&mut rng));
        let horizon = if i % 2 == 0 { 1.0 } else { 2.0 };
        let f_hat = Perturbed { base: base.clone(), g, eps };
        let b = check_theorem1(base.as_ref(), &f_hat, &[x0], horizon, dt)?;
        rows.push(Theorem1Row {
            x0,
            horizon,
            eps,
            lhs: b.lhs,
            rhs: b.rhs,
            holds: b.holds,
        });
    }
    let worst_ratio = rows
        .iter()
        .filter(|r| r.rhs > 0.0)
        .map(|r| r.lhs / r.rhs)
        .fold(0.0, f64::max);
    Ok(Theorem1Report {
        instances,
        passed: rows.iter().filter(|r| r.holds).count(),
        worst_ratio,
        rows,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Theorem2Row {
    pub eps: f64,
    pub dyn_l1: f64,
    pub state_l1: f64,
    /// `state_l1 / dyn_l1`, 0 when both vanish.
    pub ratio: f64,
}

/// One random cubic `g` scaled by `max_eps * {1, 1/2, 1/4, 1/8}`, from
/// `x0 = 1` over `[0, 2]`.
pub fn theorem2_family(seed: u64, max_eps: f64, dt: f64) -> Result<Vec<Theorem2Row>, CliError> {
    let base = get_system("tanh")?.dynamics;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_cubic(&mut rng);
    let mut rows = Vec::with_capacity(4);
    for j in 0..4 {
        let eps = max_eps / f64::from(1u32 << j);
        let f_hat = Perturbed {
            base: base.clone(),
            g: g.clone(),
            eps,
        };
        let d = check_theorem2(base.as_ref(), &f_hat, &[1.0], 2.0, dt)?;
        rows.push(Theorem2Row {
            eps,
            dyn_l1: d.dyn_l1,
            state_l1: d.state_l1,
            ratio: if d.dyn_l1 > 0.0 { d.state_l1 / d.dyn_l1 } else { 0.0 },
        });
    }
    Ok(rows)
}
