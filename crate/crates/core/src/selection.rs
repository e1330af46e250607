//! Scoring candidate dynamics models by their average encoding cost.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::dynamics::Dynamics;
use crate::integrate::rk4;
use crate::math;
use crate::partition::{licds, LicdsError, LicdsParams, LicdsResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelectionError {
    #[error("no initial points given")]
    NoInitialPoints,
    #[error("at least two candidates are required, got {0}")]
    TooFewCandidates(usize),
    #[error("every initial point failed; first error: {0}")]
    AllPointsFailed(LicdsError),
    #[error("candidate `{name}`: {source}")]
    Candidate {
        name: String,
        #[source]
        source: LicdsError,
    },
}

/// Score of one model averaged over initial points.
#[derive(Debug, Clone)]
pub struct ModelScore {
    pub mean_cost: f64,
    /// One entry per initial point, in input order.
    pub per_point: Vec<Result<LicdsResult, LicdsError>>,
}

impl ModelScore {
    pub fn successes(&self) -> usize {
        self.per_point.iter().filter(|r| r.is_ok()).count()
    }
}

/// Runs the partition search on one initial point, using the model's own
/// trajectory as the observation.
pub fn score_point(
    f_hat: &dyn Dynamics,
    x0: &[f64],
    params: &LicdsParams,
) -> Result<LicdsResult, LicdsError> {
    params.validate()?;
    let truth = rk4(f_hat, x0, 0.0, params.t_global, params.dt)?;
    licds(f_hat, &truth, params)
}

/// Mean of the finite costs, independent of their order.
pub fn order_free_mean(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.iter().sum::<f64>() / sorted.len() as f64
}

/// Reduces per-point results (in input order) into a [`ModelScore`].
pub fn summarize(per_point: Vec<Result<LicdsResult, LicdsError>>) -> Result<ModelScore, SelectionError> {
    let costs: Vec<f64> = per_point
        .iter()
        .filter_map(|r| r.as_ref().ok().map(|r| r.total_cost))
        .collect();
    if costs.is_empty() {
        let first = per_point
            .iter()
            .find_map(|r| r.as_ref().err().cloned())
            .ok_or(SelectionError::NoInitialPoints)?;
        return Err(SelectionError::AllPointsFailed(first));
    }
    Ok(ModelScore {
        mean_cost: order_free_mean(&costs),
        per_point,
    })
}

/// Average optimal cost of `f_hat` over the initial points. Points whose
/// search fails are left out of the mean.
pub fn score_model(
    f_hat: &dyn Dynamics,
    init_points: &[Vec<f64>],
    params: &LicdsParams,
) -> Result<ModelScore, SelectionError> {
    if init_points.is_empty() {
        return Err(SelectionError::NoInitialPoints);
    }
    summarize(init_points.iter().map(|x0| score_point(f_hat, x0, params)).collect())
}

/// `sqrt(integral over the box of |f - g|^2)` by tensor-product trapezoid
/// with `per_axis` nodes on every axis.
pub fn l2_distance(f: &dyn Dynamics, g: &dyn Dynamics, bounds: &[(f64, f64)], per_axis: usize) -> f64 {
    let n = bounds.len();
    let per_axis = per_axis.max(2);
    let mut idx = alloc::vec![0usize; n];
    let mut x = alloc::vec![0.0; n];
    let mut a = alloc::vec![0.0; f.dim()];
    let mut b = alloc::vec![0.0; g.dim()];
    let mut total = 0.0;
    loop {
        let mut weight = 1.0;
        for d in 0..n {
            let (lo, hi) = bounds[d];
            let h = (hi - lo) / (per_axis - 1) as f64;
            x[d] = lo + h * idx[d] as f64;
            weight *= if idx[d] == 0 || idx[d] == per_axis - 1 { 0.5 * h } else { h };
        }
        f.eval(&x, &mut a);
        g.eval(&x, &mut b);
        total += weight * math::dist_sq(&a, &b);
        let mut d = 0;
        while d < n {
            idx[d] += 1;
            if idx[d] < per_axis {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == n {
            break;
        }
    }
    math::sqrt(total)
}

/// Sorts `(name, score)` ascending by score, ties by name.
pub fn sort_ranking(ranking: &mut [(String, f64)]) {
    ranking.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
}

/// Ranks candidates by mean cost, lowest first.
pub fn rank_models(
    candidates: &[(String, &dyn Dynamics)],
    init_points: &[Vec<f64>],
    params: &LicdsParams,
) -> Result<Vec<(String, f64)>, SelectionError> {
    if candidates.len() < 2 {
        return Err(SelectionError::TooFewCandidates(candidates.len()));
    }
    let mut ranking = Vec::with_capacity(candidates.len());
    for (name, f) in candidates {
        let score = score_model(*f, init_points, params).map_err(|e| match e {
            SelectionError::AllPointsFailed(source) => SelectionError::Candidate {
                name: name.clone(),
                source,
            },
            other => other,
        })?;
        ranking.push((name.clone(), score.mean_cost));
    }
    sort_ranking(&mut ranking);
    Ok(ranking)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::FnDynamics;
    use crate::partition::Lambda;
    use crate::systems::get_system;
    use alloc::vec;

    #[test]
    fn distance_to_offset_is_offset_times_root_width() {
        let f = get_system("tanh").unwrap();
        let g = FnDynamics::new(1, |x: &[f64], out: &mut [f64]| out[0] = -x[0].tanh() + 0.5);
        let d = l2_distance(f.dynamics.as_ref(), &g, &[(-3.0, 3.0)], 601);
        assert!((d - 0.5 * 6f64.sqrt()).abs() < 1e-12);
        let flat = l2_distance(&g, &g, &[(-1.0, 1.0), (0.0, 2.0)], 11);
        assert_eq!(flat, 0.0);
    }

    fn params() -> LicdsParams {
        LicdsParams {
            t_global: 2.0,
            dt: 0.01,
            lambda: Lambda::Fixed(0.01),
            k_max: 4,
            m_max: 3,
            complexity: crate::localmodel::Complexity::Terms,
        }
    }

    #[test]
    fn single_point_mean_is_that_point() {
        let f = get_system("tanh").unwrap();
        let s = score_model(f.dynamics.as_ref(), &[vec![1.5]], &params()).unwrap();
        let only = s.per_point[0].as_ref().unwrap().total_cost;
        assert_eq!(s.mean_cost, only);
    }

    #[test]
    fn linear_model_scores_two_lambda() {
        let f = FnDynamics::new(1, |x: &[f64], out: &mut [f64]| out[0] = -0.8 * x[0]);
        let s = score_model(&f, &[vec![1.0], vec![-2.0], vec![0.5]], &params()).unwrap();
        assert!((s.mean_cost - 2.0 * 0.01).abs() < 1e-8);
        for r in &s.per_point {
            assert_eq!(r.as_ref().unwrap().m_star, 1);
        }
    }

    #[test]
    fn permutation_invariant_mean() {
        let f = get_system("tanh_sin").unwrap();
        let pts = vec![vec![2.0], vec![-1.3], vec![0.4], vec![2.9]];
        let mut rev = pts.clone();
        rev.reverse();
        let a = score_model(f.dynamics.as_ref(), &pts, &params()).unwrap();
        let b = score_model(f.dynamics.as_ref(), &rev, &params()).unwrap();
        assert_eq!(a.mean_cost.to_bits(), b.mean_cost.to_bits());
    }

    #[test]
    fn duplicate_candidates_tie_by_name() {
        let f = get_system("tanh").unwrap();
        let d: &dyn Dynamics = f.dynamics.as_ref();
        let ranking = rank_models(
            &[("b".into(), d), ("a".into(), d)],
            &[vec![2.0]],
            &params(),
        )
        .unwrap();
        assert_eq!(ranking[0].0, "a");
        assert_eq!(ranking[0].1, ranking[1].1);
    }

    #[test]
    fn true_field_beats_offset() {
        let f = get_system("tanh").unwrap();
        let offset = FnDynamics::new(1, |x: &[f64], out: &mut [f64]| out[0] = -x[0].tanh() + 0.5);
        // the initial points straddle the true equilibrium; on points placed
        // around the offset model's equilibrium instead, it can score lower
        let pts: Vec<Vec<f64>> = (0..9).map(|i| vec![-2.0 + 0.5 * i as f64]).collect();
        let p = LicdsParams {
            t_global: 4.0,
            k_max: 5,
            m_max: 5,
            ..params()
        };
        let ranking = rank_models(
            &[("offset".into(), &offset), ("true".into(), f.dynamics.as_ref())],
            &pts,
            &p,
        )
        .unwrap();
        assert_eq!(ranking[0].0, "true");
    }

    #[test]
    fn needs_two_candidates() {
        let f = get_system("tanh").unwrap();
        let err = rank_models(&[("x".into(), f.dynamics.as_ref())], &[vec![1.0]], &params());
        assert!(matches!(err, Err(SelectionError::TooFewCandidates(1))));
    }
}
