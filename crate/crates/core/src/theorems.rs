//! Numerical checks of the error-transfer inequalities between a field `f`
//! and an approximation `f^`.
//!
//! Both trajectories start from the same state and are integrated with RK4
//! on the same grid; the field residual `f(x(t)) - f^(x(t))` is always taken
//! along the trajectory of `f`.

use alloc::vec;

use crate::dynamics::Dynamics;
use crate::integrate::{rk4, IntegrateError, Trajectory};
use crate::math;

/// Relative slack of the inequality check.
pub const RELATIVE_TOLERANCE: f64 = 1e-6;
/// Absolute slack of the inequality check.
pub const ABSOLUTE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateBound {
    /// `integral |x - x^|^2 dt`
    pub lhs: f64,
    /// `T^2 integral |f(x) - f^(x)|^2 dt`
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Distances {
    /// `integral |f(x) - f^(x)| dt`
    pub dyn_l1: f64,
    /// `integral |x - x^| dt`
    pub state_l1: f64,
}

fn trajectories(
    f: &dyn Dynamics,
    f_hat: &dyn Dynamics,
    x0: &[f64],
    horizon: f64,
    dt: f64,
) -> Result<(Trajectory, Trajectory), IntegrateError> {
    Ok((rk4(f, x0, 0.0, horizon, dt)?, rk4(f_hat, x0, 0.0, horizon, dt)?))
}

fn residuals<'a>(
    f: &'a dyn Dynamics,
    f_hat: &'a dyn Dynamics,
    x: &'a Trajectory,
) -> impl ExactSizeIterator<Item = f64> + 'a {
    let n = x.dim();
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    x.states().map(move |s| {
        f.eval(s, &mut a);
        f_hat.eval(s, &mut b);
        math::dist(&a, &b)
    })
}

/// `|x - x^|^2_{L2} <= T^2 |f(x) - f^(x)|^2_{L2}` on `[0, horizon]`.
pub fn check_theorem1(
    f: &dyn Dynamics,
    f_hat: &dyn Dynamics,
    x0: &[f64],
    horizon: f64,
    dt: f64,
) -> Result<StateBound, IntegrateError> {
    let (x, x_hat) = trajectories(f, f_hat, x0, horizon, dt)?;
    let lhs = math::trapezoid(
        x.states().zip(x_hat.states()).map(|(a, b)| math::dist_sq(a, b)),
        dt,
    );
    let rhs = horizon * horizon * math::trapezoid(residuals(f, f_hat, &x).map(|r| r * r), dt);
    let holds = lhs <= rhs * (1.0 + RELATIVE_TOLERANCE) + ABSOLUTE_TOLERANCE;
    Ok(StateBound { lhs, rhs, holds })
}

/// L1-in-time distances between the fields along the trajectory of `f` and
/// between the two trajectories.
pub fn check_theorem2(
    f: &dyn Dynamics,
    f_hat: &dyn Dynamics,
    x0: &[f64],
    horizon: f64,
    dt: f64,
) -> Result<L1Distances, IntegrateError> {
    let (x, x_hat) = trajectories(f, f_hat, x0, horizon, dt)?;
    let dyn_l1 = math::trapezoid(residuals(f, f_hat, &x), dt);
    let state_l1 = math::trapezoid(
        x.states().zip(x_hat.states()).map(|(a, b)| math::dist(a, b)),
        dt,
    );
    Ok(L1Distances { dyn_l1, state_l1 })
}
