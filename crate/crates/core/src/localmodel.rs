//! Truncated Taylor models of a vector field around a working point.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::dynamics::{Dynamics, Real};
use crate::jet::{self, Jet, JetSpace};
use crate::math;

/// Highest total degree the finite-difference fallback will estimate.
pub const MAX_FD_DEGREE: u32 = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("complexity must be at least 1")]
    ZeroComplexity,
    #[error("working point has {got} components, field expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite derivative estimate for multi-index {exponent:?}")]
    NonFinite { exponent: Vec<u32> },
    #[error("finite differences refuse multi-index {exponent:?}: total degree above {MAX_FD_DEGREE}")]
    DegreeTooHigh { exponent: Vec<u32> },
}

/// How a complexity value `k` maps to a monomial basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Complexity {
    /// `k` graded-lex monomials per output component.
    #[default]
    Terms,
    /// Every monomial of total degree below `k`.
    Degree,
}

impl Complexity {
    /// Number of monomials for complexity `k` in `dim` variables.
    pub fn basis_len(self, dim: usize, k: usize) -> usize {
        match self {
            Complexity::Terms => k,
            Complexity::Degree => jet::binomial(dim + k - 1, dim),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Complexity::Terms => "terms",
            Complexity::Degree => "degree",
        }
    }
}

impl core::str::FromStr for Complexity {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "terms" => Ok(Complexity::Terms),
            "degree" => Ok(Complexity::Degree),
            _ => Err(()),
        }
    }
}

/// The first `k` monomials in graded-lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialBasis {
    dim: usize,
    exponents: Vec<Vec<u32>>,
}

impl MonomialBasis {
    pub fn new(dim: usize, k: usize) -> Self {
        assert!(dim > 0 && k > 0, "basis needs dim >= 1 and k >= 1");
        let degree = jet::degree_for_count(dim, k);
        let mut exponents = jet::graded_lex(dim, degree);
        exponents.truncate(k);
        MonomialBasis { dim, exponents }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    pub fn max_degree(&self) -> u32 {
        self.exponents
            .iter()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }
}

/// `f~(x)_d = sum_i coeffs[d][i] * prod_j (x_j - x*_j)^e_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalModel {
    working_point: Vec<f64>,
    basis: MonomialBasis,
    // row-major, dim x k
    coeffs: Vec<f64>,
}

impl LocalModel {
    /// Panics if shapes disagree.
    pub fn new(working_point: Vec<f64>, basis: MonomialBasis, coeffs: Vec<f64>) -> Self {
        assert_eq!(working_point.len(), basis.dim());
        assert_eq!(coeffs.len(), basis.dim() * basis.len());
        LocalModel {
            working_point,
            basis,
            coeffs,
        }
    }

    pub fn working_point(&self) -> &[f64] {
        &self.working_point
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn k(&self) -> usize {
        self.basis.len()
    }

    /// Coefficients of output component `d`.
    pub fn coeff_row(&self, d: usize) -> &[f64] {
        let k = self.k();
        &self.coeffs[d * k..(d + 1) * k]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// The same expansion keeping only the first `k` monomials.
    pub fn truncated(&self, k: usize) -> LocalModel {
        assert!(k >= 1 && k <= self.k());
        let old_k = self.k();
        let dim = self.basis.dim();
        let mut coeffs = Vec::with_capacity(dim * k);
        for d in 0..dim {
            coeffs.extend_from_slice(&self.coeffs[d * old_k..d * old_k + k]);
        }
        LocalModel {
            working_point: self.working_point.clone(),
            basis: MonomialBasis {
                dim,
                exponents: self.basis.exponents[..k].to_vec(),
            },
            coeffs,
        }
    }

    fn apply<S: Real>(&self, x: &[S]) -> Vec<S> {
        let dim = self.basis.dim();
        let shift: Vec<S> = x
            .iter()
            .zip(&self.working_point)
            .map(|(xi, c)| xi.offset(-c))
            .collect();
        let monomials: Vec<S> = self
            .basis
            .exponents
            .iter()
            .map(|e| {
                let mut acc = x[0].lift(1.0);
                for (s, &p) in shift.iter().zip(e) {
                    for _ in 0..p {
                        acc = acc * s.clone();
                    }
                }
                acc
            })
            .collect();
        (0..dim)
            .map(|d| {
                let mut acc = x[0].lift(0.0);
                for (m, &c) in monomials.iter().zip(self.coeff_row(d)) {
                    if c != 0.0 {
                        acc = acc + m.scale(c);
                    }
                }
                acc
            })
            .collect()
    }
}

/// Evaluates the local model at `x`.
pub fn eval_local(model: &LocalModel, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; model.basis.dim()];
    model.eval(x, &mut out);
    out
}

impl Dynamics for LocalModel {
    fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        let k = self.k();
        let mut monomials = [0.0f64; 64];
        let mut heap;
        let mono: &mut [f64] = if k <= monomials.len() {
            &mut monomials[..k]
        } else {
            heap = vec![0.0; k];
            &mut heap
        };
        for (m, e) in mono.iter_mut().zip(&self.basis.exponents) {
            let mut acc = 1.0;
            for ((xi, c), &p) in x.iter().zip(&self.working_point).zip(e) {
                if p > 0 {
                    acc *= math::powi(xi - c, p as i32);
                }
            }
            *m = acc;
        }
        for (d, o) in out.iter_mut().enumerate() {
            *o = self
                .coeff_row(d)
                .iter()
                .zip(mono.iter())
                .map(|(c, m)| c * m)
                .sum();
        }
    }

    fn eval_jet(&self, x: &[Jet]) -> Option<Vec<Jet>> {
        Some(self.apply(x))
    }
}

/// Fits the first `k` graded-lex Taylor terms of `f` around `x_star`.
///
/// Fields that evaluate on jets get exact coefficients. Opaque fields use
/// iterated central differences with per-axis step
/// `1e-3 * max(1, |x*_j|)`, limited to total degree [`MAX_FD_DEGREE`].
pub fn taylor_fit(f: &dyn Dynamics, x_star: &[f64], k: usize) -> Result<LocalModel, FitError> {
    let dim = f.dim();
    if k == 0 {
        return Err(FitError::ZeroComplexity);
    }
    if x_star.len() != dim {
        return Err(FitError::DimensionMismatch {
            expected: dim,
            got: x_star.len(),
        });
    }
    let basis = MonomialBasis::new(dim, k);
    let space = JetSpace::new(dim, basis.max_degree());
    let coeffs = match f.eval_jet(&Jet::seed(&space, x_star)) {
        Some(out) => {
            let mut coeffs = Vec::with_capacity(dim * k);
            for jet in &out {
                coeffs.extend_from_slice(&jet.coeffs()[..k]);
            }
            coeffs
        }
        None => finite_difference_coeffs(f, x_star, &basis)?,
    };
    for (i, c) in coeffs.iter().enumerate() {
        if !c.is_finite() {
            return Err(FitError::NonFinite {
                exponent: basis.exponents()[i % k].clone(),
            });
        }
    }
    Ok(LocalModel::new(x_star.to_vec(), basis, coeffs))
}

/// Taylor coefficients `d^beta f / beta!` by iterated central differences,
/// ignoring any jet support `f` may have.
pub fn finite_difference_coeffs(
    f: &dyn Dynamics,
    x_star: &[f64],
    basis: &MonomialBasis,
) -> Result<Vec<f64>, FitError> {
    let dim = f.dim();
    let k = basis.len();
    let steps: Vec<f64> = x_star.iter().map(|x| 1e-3 * math::abs(*x).max(1.0)).collect();
    let mut coeffs = vec![0.0; dim * k];
    let mut point = vec![0.0; dim];
    let mut value = vec![0.0; dim];
    for (i, beta) in basis.exponents().iter().enumerate() {
        if beta.iter().sum::<u32>() > MAX_FD_DEGREE {
            return Err(FitError::DegreeTooHigh {
                exponent: beta.clone(),
            });
        }
        // Stencil of the p-th central difference with half-step spacing:
        // offsets (p/2 - s) h, weights (-1)^s C(p, s).
        let axes: Vec<Vec<(f64, f64)>> = beta
            .iter()
            .zip(&steps)
            .map(|(&p, &h)| {
                (0..=p)
                    .map(|s| {
                        let w = jet::binomial(p as usize, s as usize) as f64;
                        let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
                        ((p as f64 / 2.0 - s as f64) * h, sign * w)
                    })
                    .collect()
            })
            .collect();
        let mut norm = 1.0;
        for (&p, &h) in beta.iter().zip(&steps) {
            norm *= math::powi(h, p as i32) * factorial(p);
        }
        let mut acc = vec![0.0; dim];
        let mut idx = vec![0usize; dim];
        loop {
            let mut weight = 1.0;
            for j in 0..dim {
                let (off, w) = axes[j][idx[j]];
                point[j] = x_star[j] + off;
                weight *= w;
            }
            f.eval(&point, &mut value);
            for d in 0..dim {
                acc[d] += weight * value[d];
            }
            // odometer over the tensor-product stencil
            let mut j = 0;
            while j < dim {
                idx[j] += 1;
                if idx[j] < axes[j].len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == dim {
                break;
            }
        }
        for d in 0..dim {
            let c = acc[d] / norm;
            if !c.is_finite() {
                return Err(FitError::NonFinite {
                    exponent: beta.clone(),
                });
            }
            coeffs[d * k + i] = c;
        }
    }
    Ok(coeffs)
}

fn factorial(p: u32) -> f64 {
    (1..=p).map(|v| v as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::FnDynamics;
    use crate::systems::get_system;

    #[test]
    fn basis_order_two_dims() {
        let b = MonomialBasis::new(2, 6);
        let expect: Vec<Vec<u32>> = vec![
            vec![0, 0],
            vec![1, 0],
            vec![0, 1],
            vec![2, 0],
            vec![1, 1],
            vec![0, 2],
        ];
        assert_eq!(b.exponents(), expect.as_slice());
        assert_eq!(MonomialBasis::new(2, 4).max_degree(), 2);
    }

    #[test]
    fn constant_field() {
        let f = FnDynamics::new(1, |_: &[f64], out: &mut [f64]| out[0] = 4.5);
        let m = taylor_fit(&f, &[1.7], 3).unwrap();
        assert_eq!(m.coeff_row(0)[0], 4.5);
        assert!(m.coeff_row(0)[1..].iter().all(|c| c.abs() < 1e-9));
    }

    #[test]
    fn neg_tanh_at_origin() {
        let f = get_system("tanh").unwrap();
        let m = taylor_fit(f.dynamics.as_ref(), &[0.0], 4).unwrap();
        let expect = [0.0, -1.0, 0.0, 1.0 / 3.0];
        for (a, b) in m.coeff_row(0).iter().zip(expect) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn neg_tanh_finite_differences() {
        let f = FnDynamics::new(1, |x: &[f64], out: &mut [f64]| out[0] = -x[0].tanh());
        let m = taylor_fit(&f, &[0.0], 4).unwrap();
        let expect = [0.0, -1.0, 0.0, 1.0 / 3.0];
        for (a, b) in m.coeff_row(0).iter().zip(expect) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn pendulum_gradient() {
        let p = get_system("pendulum").unwrap();
        let m = taylor_fit(p.dynamics.as_ref(), &[2.0, 2.0], 3).unwrap();
        let expect = [-2.0 - 9.81 * 2f64.sin(), -9.81 * 2f64.cos(), -1.0];
        for (a, b) in m.coeff_row(1).iter().zip(expect) {
            assert!((a - b).abs() < 1e-5);
        }
        assert_eq!(m.coeff_row(0), &[2.0, 0.0, 1.0]);
    }

    #[test]
    fn fd_refuses_degree_five() {
        let f = FnDynamics::new(1, |x: &[f64], out: &mut [f64]| out[0] = x[0]);
        assert!(matches!(
            taylor_fit(&f, &[0.0], 6),
            Err(FitError::DegreeTooHigh { .. })
        ));
    }

    #[test]
    fn non_finite_derivative_names_index() {
        let f = FnDynamics::new(1, |x: &[f64], out: &mut [f64]| out[0] = 1.0 / x[0]);
        let err = taylor_fit(&f, &[0.0], 2).unwrap_err();
        assert!(matches!(err, FitError::NonFinite { .. }), "{err:?}");
    }

    #[test]
    fn eval_at_working_point_gives_constants() {
        let p = get_system("pendulum").unwrap();
        let m = taylor_fit(p.dynamics.as_ref(), &[0.4, -1.0], 6).unwrap();
        let v = eval_local(&m, &[0.4, -1.0]);
        assert_eq!(v, vec![m.coeff_row(0)[0], m.coeff_row(1)[0]]);
    }

    #[test]
    fn eval_linear_and_cubic() {
        let f = get_system("tanh").unwrap();
        let lin = taylor_fit(f.dynamics.as_ref(), &[0.0], 2).unwrap();
        assert!((eval_local(&lin, &[0.1])[0] + 0.1).abs() < 1e-15);
        let cubic = taylor_fit(f.dynamics.as_ref(), &[0.0], 4).unwrap();
        let c = cubic.coeff_row(0);
        let oracle = c[0] + c[1] * 0.5 + c[2] * 0.25 + c[3] * 0.125;
        let v = eval_local(&cubic, &[0.5])[0];
        assert!((v - oracle).abs() < 1e-12);
        assert!((v - (-0.5 + 0.125 / 3.0)).abs() < 1e-4);
    }

    #[test]
    fn truncation_keeps_prefix() {
        let p = get_system("pendulum").unwrap();
        let full = taylor_fit(p.dynamics.as_ref(), &[1.0, 0.5], 6).unwrap();
        let short = taylor_fit(p.dynamics.as_ref(), &[1.0, 0.5], 3).unwrap();
        assert_eq!(full.truncated(3), short);
    }

    #[test]
    fn jets_match_finite_differences() {
        let p = get_system("pendulum").unwrap();
        let opaque = FnDynamics::new(2, |x: &[f64], out: &mut [f64]| p.dynamics.eval(x, out));
        for x in [[2.0, 2.0], [-0.7, 0.3], [0.1, -3.0]] {
            let exact = taylor_fit(p.dynamics.as_ref(), &x, 10).unwrap();
            let fd = taylor_fit(&opaque, &x, 10).unwrap();
            for (a, b) in exact.coeffs().iter().zip(fd.coeffs()) {
                assert!((a - b).abs() < 1e-5, "{a} vs {b}");
            }
        }
    }
}
