//! The vector-field interface shared by builtin systems, learned models and
//! local Taylor models.

use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::jet::Jet;
use crate::math;

/// Scalar type a vector field can be evaluated on: plain `f64`, or a [`Jet`]
/// to obtain Taylor coefficients.
pub trait Real:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// A constant living in the same space as `self`.
    fn lift(&self, v: f64) -> Self;
    fn value(&self) -> f64;
    fn scale(&self, c: f64) -> Self;
    fn offset(&self, c: f64) -> Self;
    fn tanh(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn tan(&self) -> Self;
    fn exp(&self) -> Self;
    fn clamp_value(&self, lo: f64, hi: f64) -> Self;
}

impl Real for f64 {
    fn lift(&self, v: f64) -> f64 {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn scale(&self, c: f64) -> f64 {
        self * c
    }
    fn offset(&self, c: f64) -> f64 {
        self + c
    }
    fn tanh(&self) -> f64 {
        math::tanh(*self)
    }
    fn sin(&self) -> f64 {
        math::sin(*self)
    }
    fn cos(&self) -> f64 {
        math::cos(*self)
    }
    fn tan(&self) -> f64 {
        math::tan(*self)
    }
    fn exp(&self) -> f64 {
        math::exp(*self)
    }
    fn clamp_value(&self, lo: f64, hi: f64) -> f64 {
        self.clamp(lo, hi)
    }
}

impl Real for Jet {
    fn lift(&self, v: f64) -> Jet {
        Jet::constant(self.space(), v)
    }
    fn value(&self) -> f64 {
        Jet::value(self)
    }
    fn scale(&self, c: f64) -> Jet {
        Jet::scale(self, c)
    }
    fn offset(&self, c: f64) -> Jet {
        Jet::offset(self, c)
    }
    fn tanh(&self) -> Jet {
        Jet::tanh(self)
    }
    fn sin(&self) -> Jet {
        Jet::sin(self)
    }
    fn cos(&self) -> Jet {
        Jet::cos(self)
    }
    fn tan(&self) -> Jet {
        Jet::tan(self)
    }
    fn exp(&self) -> Jet {
        Jet::exp(self)
    }
    fn clamp_value(&self, lo: f64, hi: f64) -> Jet {
        Jet::clamp_value(self, lo, hi)
    }
}

/// An autonomous vector field `f: R^n -> R^n`.
///
/// Implementations must be deterministic. Fields that can be evaluated on
/// [`Jet`]s return `Some` from [`Dynamics::eval_jet`], which gives exact
/// Taylor coefficients; otherwise local models fall back to finite
/// differences.
pub trait Dynamics: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64], out: &mut [f64]);

    fn eval_jet(&self, _x: &[Jet]) -> Option<Vec<Jet>> {
        None
    }

    fn eval_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.dim()];
        self.eval(x, &mut out);
        out
    }
}

impl<T: Dynamics + ?Sized> Dynamics for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64], out: &mut [f64]) {
        (**self).eval(x, out)
    }
    fn eval_jet(&self, x: &[Jet]) -> Option<Vec<Jet>> {
        (**self).eval_jet(x)
    }
}

impl<T: Dynamics + ?Sized> Dynamics for alloc::boxed::Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64], out: &mut [f64]) {
        (**self).eval(x, out)
    }
    fn eval_jet(&self, x: &[Jet]) -> Option<Vec<Jet>> {
        (**self).eval_jet(x)
    }
}

impl<T: Dynamics + ?Sized> Dynamics for alloc::sync::Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64], out: &mut [f64]) {
        (**self).eval(x, out)
    }
    fn eval_jet(&self, x: &[Jet]) -> Option<Vec<Jet>> {
        (**self).eval_jet(x)
    }
}

/// Wraps an opaque closure; only point evaluations are available.
pub struct FnDynamics<F> {
    dim: usize,
    f: F,
}

impl<F> FnDynamics<F>
where
    F: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        FnDynamics { dim, f }
    }
}

impl<F> fmt::Debug for FnDynamics<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnDynamics").field("dim", &self.dim).finish()
    }
}

impl<F> Dynamics for FnDynamics<F>
where
    F: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[f64], out: &mut [f64]) {
        (self.f)(x, out)
    }
}
