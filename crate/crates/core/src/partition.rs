//! Partition search: local model selection per window and the choice of
//! the number of windows.
//!
//! The horizon `[0, T]` is split into `m` windows on the sampling grid. Each
//! window restarts from the observed state at its start, fits Taylor models
//! of complexity `k = 1..=k_max` around that state, rolls each one out and
//! charges `lambda * k + integral |x~ - x|_2 dt` (composite trapezoid on the
//! grid). The cheapest `k` wins the window; the cheapest total over
//! `m = 1..=m_max` wins overall. Ties go to the smaller `k` or `m`.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::dynamics::Dynamics;
use crate::integrate::{rk4_steps, IntegrateError, Trajectory};
use crate::localmodel::{taylor_fit, Complexity, FitError, LocalModel};
use crate::math;

/// Floor applied to an automatically calibrated complexity weight.
pub const LAMBDA_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LicdsError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("observed trajectory does not match the parameters: {0}")]
    TruthMismatch(String),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error("every candidate complexity diverged in window {window}")]
    WindowFailed { window: usize },
    #[error("no partition count produced a finite cost")]
    AllPartitionsFailed,
    #[error("calibration error term is not finite")]
    NonFiniteCalibration,
}

/// Weight of the complexity term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lambda {
    Fixed(f64),
    /// Resolved by [`calibrate_lambda`].
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LicdsParams {
    pub t_global: f64,
    pub dt: f64,
    pub lambda: Lambda,
    pub k_max: usize,
    pub m_max: usize,
    pub complexity: Complexity,
}

impl LicdsParams {
    /// Checks the invariants and returns the number of grid steps.
    pub fn validate(&self) -> Result<usize, LicdsError> {
        let steps = math::step_count(self.t_global, self.dt).ok_or_else(|| {
            LicdsError::InvalidParams(alloc::format!(
                "T_global {} is not a positive multiple of dt {}",
                self.t_global, self.dt
            ))
        })?;
        if self.k_max == 0 || self.m_max == 0 {
            return Err(LicdsError::InvalidParams("k_max and m_max must be >= 1".into()));
        }
        if steps < self.m_max {
            return Err(LicdsError::InvalidParams(alloc::format!(
                "{steps} steps cannot hold {} partitions",
                self.m_max
            )));
        }
        if let Lambda::Fixed(l) = self.lambda {
            if !(l >= 0.0) || !l.is_finite() {
                return Err(LicdsError::InvalidParams(alloc::format!(
                    "lambda must be finite and non-negative, got {l}"
                )));
            }
        }
        Ok(steps)
    }
}

/// Grid-aligned window `[start, end]` (sample indices); `index` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub index: usize,
    pub start: usize,
    pub end: usize,
}

impl Window {
    /// Splits `steps` grid intervals into `m` windows with boundaries at
    /// `floor(i * steps / m)`.
    pub fn split(steps: usize, m: usize) -> Vec<Window> {
        (0..m)
            .map(|i| Window {
                index: i + 1,
                start: i * steps / m,
                end: (i + 1) * steps / m,
            })
            .collect()
    }

    pub fn steps(&self) -> usize {
        self.end - self.start
    }
}

/// Outcome of one candidate complexity in one window.
#[derive(Debug, Clone)]
pub struct LocalCost {
    /// `lambda * k + integral`, or `+inf` when the rollout diverged.
    pub cost: f64,
    pub integral: f64,
    pub model: LocalModel,
    pub rollout: Option<Trajectory>,
}

fn check_window(truth: &Trajectory, window: &Window) -> Result<(), LicdsError> {
    if window.end <= window.start || window.end >= truth.len() {
        return Err(LicdsError::TruthMismatch(alloc::format!(
            "window {}..={} outside {} samples",
            window.start,
            window.end,
            truth.len()
        )));
    }
    Ok(())
}

/// Integral of `|rollout - truth|_2` over the window by the trapezoid rule.
pub(crate) fn window_error(truth: &Trajectory, window: &Window, rollout: &Trajectory) -> f64 {
    let errs = (0..window.steps() + 1)
        .map(|i| math::dist(rollout.state(i), truth.state(window.start + i)));
    math::trapezoid(errs, truth.dt())
}

fn evaluate_model(
    model: LocalModel,
    truth: &Trajectory,
    window: &Window,
    lambda: f64,
    k: usize,
) -> LocalCost {
    let x0 = truth.state(window.start);
    match rk4_steps(&model, x0, truth.time(window.start), truth.dt(), window.steps()) {
        Ok(rollout) => {
            let integral = window_error(truth, window, &rollout);
            let cost = if integral.is_finite() {
                lambda * k as f64 + integral
            } else {
                f64::INFINITY
            };
            LocalCost {
                cost,
                integral,
                model,
                rollout: Some(rollout),
            }
        }
        Err(_) => LocalCost {
            cost: f64::INFINITY,
            integral: f64::INFINITY,
            model,
            rollout: None,
        },
    }
}

/// Cost of a complexity-`k` Taylor model expanded at the window's restart
/// state (the observed sample at `window.start`).
pub fn local_cost(
    f: &dyn Dynamics,
    truth: &Trajectory,
    window: &Window,
    k: usize,
    lambda: f64,
) -> Result<LocalCost, LicdsError> {
    check_window(truth, window)?;
    let model = taylor_fit(f, truth.state(window.start), k)?;
    Ok(evaluate_model(model, truth, window, lambda, k))
}

/// Selected model of one window.
#[derive(Debug, Clone)]
pub struct PartitionResult {
    pub window: Window,
    pub k_star: usize,
    pub cost: f64,
    pub integral: f64,
    pub model: LocalModel,
    pub restart_state: Vec<f64>,
    pub local_states: Trajectory,
    /// Cost for every `k = 1..=k_max`, `+inf` where the rollout diverged.
    pub candidate_costs: Vec<f64>,
}

/// Local model selection: the cheapest `k` in `1..=k_max` for one window.
pub fn lms(
    f: &dyn Dynamics,
    truth: &Trajectory,
    window: &Window,
    lambda: f64,
    k_max: usize,
    complexity: Complexity,
) -> Result<PartitionResult, LicdsError> {
    check_window(truth, window)?;
    let restart = truth.state(window.start);
    let dim = restart.len();
    // Taylor coefficients do not depend on k: fit once, truncate per candidate.
    let full = taylor_fit(f, restart, complexity.basis_len(dim, k_max))?;
    let mut best: Option<(usize, LocalCost)> = None;
    let mut candidate_costs = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let model = full.truncated(complexity.basis_len(dim, k));
        let candidate = evaluate_model(model, truth, window, lambda, k);
        candidate_costs.push(candidate.cost);
        let better = match &best {
            None => candidate.cost.is_finite(),
            Some((_, b)) => candidate.cost < b.cost,
        };
        if better {
            best = Some((k, candidate));
        }
    }
    let (k_star, chosen) = best.ok_or(LicdsError::WindowFailed {
        window: window.index,
    })?;
    Ok(PartitionResult {
        window: *window,
        k_star,
        cost: chosen.cost,
        integral: chosen.integral,
        model: chosen.model,
        restart_state: restart.to_vec(),
        local_states: chosen.rollout.expect("finite cost implies a rollout"),
        candidate_costs,
    })
}

/// Total cost and complexity for one partition count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostPoint {
    pub m: usize,
    /// `+inf` when some window failed.
    pub total_cost: f64,
    pub total_complexity: usize,
}

#[derive(Debug, Clone)]
pub struct LicdsResult {
    pub params: LicdsParams,
    /// The weight actually used (after calibration).
    pub lambda: f64,
    pub m_star: usize,
    pub total_cost: f64,
    pub total_complexity: usize,
    pub partitions: Vec<PartitionResult>,
    pub cost_curve: Vec<CostPoint>,
    /// Piecewise reconstruction on the full grid.
    pub approx_states: Trajectory,
    /// Selected partitions for every `m` (empty where some window failed).
    pub all_partitions: Vec<Vec<PartitionResult>>,
}

impl LicdsResult {
    pub fn dim(&self) -> usize {
        self.approx_states.dim()
    }

    pub fn steps(&self) -> usize {
        self.approx_states.len() - 1
    }
}

fn check_truth(truth: &Trajectory, params: &LicdsParams, steps: usize) -> Result<(), LicdsError> {
    if truth.len() != steps + 1 {
        return Err(LicdsError::TruthMismatch(alloc::format!(
            "expected {} samples, got {}",
            steps + 1,
            truth.len()
        )));
    }
    if math::abs(truth.dt() - params.dt) > 1e-12 * params.dt {
        return Err(LicdsError::TruthMismatch(alloc::format!(
            "sampling step {} differs from dt {}",
            truth.dt(),
            params.dt
        )));
    }
    Ok(())
}

/// Concatenates window rollouts: window `j` covers samples
/// `start_j .. end_j`, the final window also its end sample.
pub(crate) fn stitch(parts: &[PartitionResult], dim: usize, dt: f64, t0: f64) -> Trajectory {
    let mut out = Trajectory::new(dim, dt, t0);
    for (j, p) in parts.iter().enumerate() {
        let last = if j + 1 == parts.len() {
            p.window.steps()
        } else {
            p.window.steps() - 1
        };
        for i in 0..=last {
            out.push(p.local_states.state(i));
        }
    }
    out
}

/// Complexity weight making the two cost terms comparable: the integral
/// error `E1` of a single constant model over the whole horizon, divided by
/// `k_max` and floored at [`LAMBDA_FLOOR`].
pub fn calibrate_lambda(
    f: &dyn Dynamics,
    truth: &Trajectory,
    params: &LicdsParams,
) -> Result<f64, LicdsError> {
    let steps = params.validate()?;
    check_truth(truth, params, steps)?;
    let whole = Window {
        index: 1,
        start: 0,
        end: steps,
    };
    let e1 = local_cost(f, truth, &whole, 1, 0.0)?.integral;
    if !e1.is_finite() {
        return Err(LicdsError::NonFiniteCalibration);
    }
    Ok((e1 / params.k_max as f64).max(LAMBDA_FLOOR))
}

/// Searches `m = 1..=m_max` equal windows over the observed trajectory.
pub fn licds(
    f: &dyn Dynamics,
    truth: &Trajectory,
    params: &LicdsParams,
) -> Result<LicdsResult, LicdsError> {
    let steps = params.validate()?;
    check_truth(truth, params, steps)?;
    if truth.dim() != f.dim() {
        return Err(LicdsError::TruthMismatch(alloc::format!(
            "trajectory dimension {} differs from field dimension {}",
            truth.dim(),
            f.dim()
        )));
    }
    let lambda = match params.lambda {
        Lambda::Fixed(l) => l,
        Lambda::Auto => calibrate_lambda(f, truth, params)?,
    };

    let mut cost_curve = Vec::with_capacity(params.m_max);
    let mut all_partitions = Vec::with_capacity(params.m_max);
    let mut best: Option<usize> = None;
    for m in 1..=params.m_max {
        let mut parts = Vec::with_capacity(m);
        let mut total = 0.0;
        let mut complexity = 0;
        for window in Window::split(steps, m) {
            match lms(f, truth, &window, lambda, params.k_max, params.complexity) {
                Ok(p) => {
                    total += p.cost;
                    complexity += p.k_star;
                    parts.push(p);
                }
                Err(LicdsError::WindowFailed { .. }) => {
                    total = f64::INFINITY;
                    parts.clear();
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        cost_curve.push(CostPoint {
            m,
            total_cost: total,
            total_complexity: if total.is_finite() { complexity } else { 0 },
        });
        all_partitions.push(parts);
        let improves = match best {
            None => total.is_finite(),
            Some(b) => total < cost_curve[b].total_cost,
        };
        if improves {
            best = Some(m - 1);
        }
    }
    let best = best.ok_or(LicdsError::AllPartitionsFailed)?;
    let partitions = all_partitions[best].clone();
    let approx_states = stitch(&partitions, truth.dim(), truth.dt(), truth.t0());
    Ok(LicdsResult {
        params: params.clone(),
        lambda,
        m_star: best + 1,
        total_cost: cost_curve[best].total_cost,
        total_complexity: cost_curve[best].total_complexity,
        partitions,
        cost_curve,
        approx_states,
        all_partitions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::FnDynamics;
    use crate::integrate::rk4;
    use crate::systems::get_system;

    fn linear() -> FnDynamics<impl Fn(&[f64], &mut [f64]) + Send + Sync> {
        FnDynamics::new(1, |x: &[f64], out: &mut [f64]| out[0] = -x[0])
    }

    fn params(t: f64, lambda: Lambda, k_max: usize, m_max: usize) -> LicdsParams {
        LicdsParams {
            t_global: t,
            dt: 0.01,
            lambda,
            k_max,
            m_max,
            complexity: Complexity::Terms,
        }
    }

    #[test]
    fn split_covers_grid() {
        let w = Window::split(400, 3);
        assert_eq!(w[0], Window { index: 1, start: 0, end: 133 });
        assert_eq!(w[1], Window { index: 2, start: 133, end: 266 });
        assert_eq!(w[2], Window { index: 3, start: 266, end: 400 });
    }

    #[test]
    fn linear_field_exact_at_k2() {
        let f = linear();
        let truth = rk4(&f, &[1.0], 0.0, 1.0, 0.01).unwrap();
        let w = Window { index: 1, start: 0, end: 100 };
        let c = local_cost(&f, &truth, &w, 2, 0.1).unwrap();
        assert!((c.cost - 0.2).abs() <= 1e-8);
        let row = c.model.coeff_row(0);
        assert!((row[0] + 1.0).abs() < 1e-8 && (row[1] + 1.0).abs() < 1e-6);
    }

    #[test]
    fn constant_field_picks_k1() {
        let f = FnDynamics::new(1, |_: &[f64], out: &mut [f64]| out[0] = 0.7);
        let truth = rk4(&f, &[0.0], 0.0, 1.0, 0.01).unwrap();
        let w = Window { index: 1, start: 0, end: 100 };
        let p = lms(&f, &truth, &w, 0.5, 4, Complexity::Terms).unwrap();
        assert_eq!(p.k_star, 1);
        assert_eq!(p.candidate_costs.len(), 4);
    }

    #[test]
    fn large_lambda_forces_k1() {
        let f = get_system("tanh").unwrap();
        let truth = rk4(f.dynamics.as_ref(), &[2.0], 0.0, 4.0, 0.01).unwrap();
        let w = Window { index: 1, start: 0, end: 400 };
        let e1 = local_cost(f.dynamics.as_ref(), &truth, &w, 1, 0.0).unwrap().integral;
        let p = lms(f.dynamics.as_ref(), &truth, &w, 2.0 * e1, 8, Complexity::Terms).unwrap();
        assert_eq!(p.k_star, 1);
    }

    #[test]
    fn linear_field_prefers_one_window() {
        let f = linear();
        let truth = rk4(&f, &[1.5], 0.0, 2.0, 0.01).unwrap();
        let r = licds(&f, &truth, &params(2.0, Lambda::Fixed(0.05), 4, 4)).unwrap();
        assert_eq!(r.m_star, 1);
        assert_eq!(r.partitions[0].k_star, 2);
    }

    #[test]
    fn restart_states_come_from_truth() {
        let f = get_system("pendulum").unwrap();
        let truth = rk4(f.dynamics.as_ref(), &[2.0, 2.0], 0.0, 3.0, 0.01).unwrap();
        let r = licds(f.dynamics.as_ref(), &truth, &params(3.0, Lambda::Fixed(0.01), 4, 4)).unwrap();
        for parts in &r.all_partitions {
            for p in parts {
                assert_eq!(p.restart_state.as_slice(), truth.state(p.window.start));
            }
        }
        assert_eq!(r.approx_states.len(), truth.len());
    }

    #[test]
    fn auto_lambda_is_e1_over_kmax() {
        let f = get_system("tanh").unwrap();
        let truth = rk4(f.dynamics.as_ref(), &[2.0], 0.0, 4.0, 0.01).unwrap();
        let p8 = params(4.0, Lambda::Auto, 8, 5);
        let p4 = params(4.0, Lambda::Auto, 4, 5);
        let l8 = calibrate_lambda(f.dynamics.as_ref(), &truth, &p8).unwrap();
        let l4 = calibrate_lambda(f.dynamics.as_ref(), &truth, &p4).unwrap();
        let w = Window { index: 1, start: 0, end: 400 };
        let e1 = local_cost(f.dynamics.as_ref(), &truth, &w, 1, 0.0).unwrap().integral;
        assert_eq!(l8 * 8.0, e1);
        assert_eq!(l4, 2.0 * l8);
    }

    #[test]
    fn constant_field_hits_lambda_floor() {
        let f = FnDynamics::new(1, |_: &[f64], out: &mut [f64]| out[0] = 0.3);
        let truth = rk4(&f, &[0.0], 0.0, 1.0, 0.01).unwrap();
        let l = calibrate_lambda(&f, &truth, &params(1.0, Lambda::Auto, 4, 2)).unwrap();
        assert_eq!(l, LAMBDA_FLOOR);
    }

    #[test]
    fn rejects_bad_params() {
        let f = linear();
        let truth = rk4(&f, &[1.0], 0.0, 0.05, 0.01).unwrap();
        let err = licds(&f, &truth, &params(0.05, Lambda::Fixed(0.1), 2, 6)).unwrap_err();
        assert!(matches!(err, LicdsError::InvalidParams(_)));
        let err = licds(&f, &truth, &params(1.0, Lambda::Fixed(0.1), 2, 2)).unwrap_err();
        assert!(matches!(err, LicdsError::TruthMismatch(_)));
    }

    #[test]
    fn diverging_candidates_are_rejected_not_fatal() {
        // The quadratic model of x' = x^2 around 1 is exact and reaches
        // infinity at t = 1, inside the window.
        let f = FnDynamics::new(1, |x: &[f64], out: &mut [f64]| out[0] = x[0] * x[0]);
        let truth = Trajectory::from_states(&alloc::vec![alloc::vec![1.0]; 301], 0.01, 0.0);
        let w = Window { index: 1, start: 0, end: 300 };
        let c = local_cost(&f, &truth, &w, 3, 0.0).unwrap();
        assert_eq!(c.cost, f64::INFINITY);
        assert!(c.rollout.is_none());
        let p = lms(&f, &truth, &w, 0.0, 3, Complexity::Terms).unwrap();
        assert_eq!(p.candidate_costs[2], f64::INFINITY);
        assert!(p.cost.is_finite() && p.k_star < 3);
    }
}
