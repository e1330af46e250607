//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] holds the Taylor coefficients of a quantity in the displacement
//! `x - x*`, up to a fixed total degree, with coefficients laid out in the
//! same graded-lexicographic order as [`crate::MonomialBasis`]. Evaluating a
//! vector field on jets seeded with [`Jet::variable`] yields its exact local
//! Taylor model in one pass.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::math;

/// Multi-indices in `dim` variables in graded-lexicographic order, all total
/// degrees `0..=degree`.
///
/// Within one degree the first variable carries the highest power first, so
/// for two variables the order is `1, x1, x2, x1^2, x1 x2, x2^2, ...`.
pub fn graded_lex(dim: usize, degree: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for d in 0..=degree {
        let mut current = vec![0u32; dim];
        push_degree(&mut out, &mut current, 0, d);
    }
    out
}

fn push_degree(out: &mut Vec<Vec<u32>>, current: &mut Vec<u32>, pos: usize, remaining: u32) {
    let dim = current.len();
    if dim == 0 {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if pos == dim - 1 {
        current[pos] = remaining;
        out.push(current.clone());
        current[pos] = 0;
        return;
    }
    for p in (0..=remaining).rev() {
        current[pos] = p;
        push_degree(out, current, pos + 1, remaining - p);
    }
    current[pos] = 0;
}

/// Smallest total degree whose graded-lex prefix holds at least `count` terms.
pub fn degree_for_count(dim: usize, count: usize) -> u32 {
    let mut degree = 0u32;
    let mut total = 0usize;
    loop {
        total += binomial(degree as usize + dim - 1, dim - 1);
        if total >= count {
            return degree;
        }
        degree += 1;
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Shared layout of all jets in `dim` variables truncated at `degree`.
pub struct JetSpace {
    dim: usize,
    degree: u32,
    exponents: Vec<Vec<u32>>,
    degrees: Vec<u32>,
    // (i, j, k): monomial i times monomial j is monomial k
    products: Vec<(u32, u32, u32)>,
}

impl JetSpace {
    pub fn new(dim: usize, degree: u32) -> Arc<Self> {
        assert!(dim > 0, "jet space needs at least one variable");
        let exponents = graded_lex(dim, degree);
        let degrees: Vec<u32> = exponents.iter().map(|e| e.iter().sum()).collect();
        let index: BTreeMap<&[u32], u32> = exponents
            .iter()
            .enumerate()
            .map(|(i, e)| (e.as_slice(), i as u32))
            .collect();
        let mut products = Vec::new();
        let mut sum = vec![0u32; dim];
        for (i, ei) in exponents.iter().enumerate() {
            for (j, ej) in exponents.iter().enumerate() {
                if degrees[i] + degrees[j] > degree {
                    continue;
                }
                for d in 0..dim {
                    sum[d] = ei[d] + ej[d];
                }
                let k = index[sum.as_slice()];
                products.push((i as u32, j as u32, k));
            }
        }
        Arc::new(JetSpace {
            dim,
            degree,
            exponents,
            degrees,
            products,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
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

    pub fn total_degree(&self, index: usize) -> u32 {
        self.degrees[index]
    }
}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetSpace")
            .field("dim", &self.dim)
            .field("degree", &self.degree)
            .field("terms", &self.exponents.len())
            .finish()
    }
}

/// Truncated Taylor polynomial in the displacement from an expansion point.
#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Jet").field(&self.coeffs).finish()
    }
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, value: f64) -> Self {
        let mut coeffs = vec![0.0; space.len()];
        coeffs[0] = value;
        Jet {
            space: Arc::clone(space),
            coeffs,
        }
    }

    /// The coordinate `x_axis` expanded around `value`.
    pub fn variable(space: &Arc<JetSpace>, value: f64, axis: usize) -> Self {
        let mut jet = Jet::constant(space, value);
        if space.degree >= 1 {
            // degree-one monomials follow the constant, one per axis in order
            jet.coeffs[1 + axis] = 1.0;
        }
        jet
    }

    /// Seeds one variable jet per coordinate of `point`.
    pub fn seed(space: &Arc<JetSpace>, point: &[f64]) -> Vec<Jet> {
        point
            .iter()
            .enumerate()
            .map(|(axis, &v)| Jet::variable(space, v, axis))
            .collect()
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn scale(&self, c: f64) -> Jet {
        Jet {
            space: Arc::clone(&self.space),
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn offset(&self, c: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    fn zip_with(&self, other: &Jet, op: impl Fn(f64, f64) -> f64) -> Jet {
        debug_assert!(Arc::ptr_eq(&self.space, &other.space) || self.space.len() == other.space.len());
        Jet {
            space: Arc::clone(&self.space),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        }
    }

    fn product(&self, other: &Jet) -> Jet {
        let mut coeffs = vec![0.0; self.coeffs.len()];
        for &(i, j, k) in &self.space.products {
            let a = self.coeffs[i as usize];
            if a != 0.0 {
                coeffs[k as usize] += a * other.coeffs[j as usize];
            }
        }
        Jet {
            space: Arc::clone(&self.space),
            coeffs,
        }
    }

    /// Applies a scalar function given its normalised derivatives at the
    /// expansion value: `series[j] = g^(j)(a0) / j!`.
    fn compose(&self, series: &[f64]) -> Jet {
        let degree = self.space.degree as usize;
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut out = Jet::constant(&self.space, series[degree]);
        for j in (0..degree).rev() {
            out = out.product(&h);
            out.coeffs[0] += series[j];
        }
        out
    }

    pub fn exp(&self) -> Jet {
        let e = math::exp(self.value());
        let mut series = vec![0.0; self.space.degree as usize + 1];
        let mut fact = 1.0;
        for (j, s) in series.iter_mut().enumerate() {
            if j > 0 {
                fact *= j as f64;
            }
            *s = e / fact;
        }
        self.compose(&series)
    }

    pub fn sin(&self) -> Jet {
        self.compose(&trig_series(self.value(), self.space.degree, 0))
    }

    pub fn cos(&self) -> Jet {
        self.compose(&trig_series(self.value(), self.space.degree, 1))
    }

    pub fn tanh(&self) -> Jet {
        // y' = 1 - y^2
        self.compose(&riccati_series(math::tanh(self.value()), self.space.degree, -1.0))
    }

    pub fn tan(&self) -> Jet {
        // y' = 1 + y^2
        self.compose(&riccati_series(math::tan(self.value()), self.space.degree, 1.0))
    }

    pub fn recip(&self) -> Jet {
        let a = self.value();
        let mut series = vec![0.0; self.space.degree as usize + 1];
        let mut p = 1.0 / a;
        for s in series.iter_mut() {
            *s = p;
            p *= -1.0 / a;
        }
        self.compose(&series)
    }

    /// Saturation `clamp(x, lo, hi)`; derivatives vanish outside `(lo, hi)`.
    pub fn clamp_value(&self, lo: f64, hi: f64) -> Jet {
        let v = self.value();
        if v > lo && v < hi {
            self.clone()
        } else {
            Jet::constant(&self.space, v.clamp(lo, hi))
        }
    }
}

fn trig_series(a: f64, degree: u32, shift: usize) -> Vec<f64> {
    let (s, c) = (math::sin(a), math::cos(a));
    let cycle = [s, c, -s, -c];
    let mut out = Vec::with_capacity(degree as usize + 1);
    let mut fact = 1.0;
    for j in 0..=degree as usize {
        if j > 0 {
            fact *= j as f64;
        }
        out.push(cycle[(j + shift) % 4] / fact);
    }
    out
}

// Series of y with y' = 1 + sign * y^2 around y(0) = y0.
fn riccati_series(y0: f64, degree: u32, sign: f64) -> Vec<f64> {
    let n = degree as usize + 1;
    let mut y = vec![0.0; n];
    y[0] = y0;
    for j in 0..n - 1 {
        let mut conv = 0.0;
        for i in 0..=j {
            conv += y[i] * y[j - i];
        }
        let forcing = if j == 0 { 1.0 } else { 0.0 };
        y[j + 1] = (forcing + sign * conv) / (j as f64 + 1.0);
    }
    y
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        self.zip_with(&rhs, |a, b| a + b)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self.zip_with(&rhs, |a, b| a - b)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        self.product(&rhs)
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        self.product(&rhs.recip())
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl<'a> Add<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<'a> Sub<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl<'a> Mul<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.product(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_lex_two_dims() {
        let e = graded_lex(2, 2);
        let expect: Vec<Vec<u32>> = vec![
            vec![0, 0],
            vec![1, 0],
            vec![0, 1],
            vec![2, 0],
            vec![1, 1],
            vec![0, 2],
        ];
        assert_eq!(e, expect);
    }

    #[test]
    fn graded_lex_counts_match_binomials() {
        for dim in 1..5 {
            for degree in 0..5u32 {
                let n = graded_lex(dim, degree).len();
                assert_eq!(n, binomial(dim + degree as usize, dim));
            }
        }
    }

    #[test]
    fn degree_for_count_is_minimal() {
        assert_eq!(degree_for_count(1, 1), 0);
        assert_eq!(degree_for_count(1, 8), 7);
        assert_eq!(degree_for_count(2, 3), 1);
        assert_eq!(degree_for_count(2, 4), 2);
        assert_eq!(degree_for_count(8, 9), 1);
        assert_eq!(degree_for_count(8, 10), 2);
    }

    #[test]
    fn product_of_linear_jets() {
        let space = JetSpace::new(2, 2);
        let v = Jet::seed(&space, &[2.0, 3.0]);
        // (2 + h1)(3 + h2) = 6 + 3 h1 + 2 h2 + h1 h2
        let p = &v[0] * &v[1];
        assert_eq!(p.coeffs(), &[6.0, 3.0, 2.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn tanh_series_at_zero() {
        let space = JetSpace::new(1, 7);
        let x = Jet::variable(&space, 0.0, 0);
        let t = x.tanh();
        let expect = [0.0, 1.0, 0.0, -1.0 / 3.0, 0.0, 2.0 / 15.0, 0.0, -17.0 / 315.0];
        for (a, b) in t.coeffs().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn recip_and_div_agree() {
        let space = JetSpace::new(1, 5);
        let x = Jet::variable(&space, 0.5, 0);
        let one = Jet::constant(&space, 1.0);
        let q = one / x.clone();
        let r = x.recip();
        assert_eq!(q.coeffs(), r.coeffs());
        // 1/(0.5 + h) = 2 - 4 h + 8 h^2 - ...
        assert!((r.coeffs()[2] - 8.0).abs() < 1e-12);
    }

    #[test]
    fn sin_cos_identity() {
        let space = JetSpace::new(2, 4);
        let v = Jet::seed(&space, &[0.3, -1.1]);
        let arg = &v[0] * &v[1];
        let s = arg.sin();
        let c = arg.cos();
        let one = &(&s * &s) + &(&c * &c);
        assert!((one.coeffs()[0] - 1.0).abs() < 1e-14);
        for c in &one.coeffs()[1..] {
            assert!(c.abs() < 1e-13);
        }
    }
}
