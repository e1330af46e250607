use licds_core::localmodel::eval_local;
use licds_core::{get_system, licds, rk4, taylor_fit, Complexity, Lambda, LicdsParams, MonomialBasis};

#[test]
fn neg_tanh_series() {
    let f = get_system("tanh").unwrap();
    let m = taylor_fit(f.dynamics.as_ref(), &[0.0], 4).unwrap();
    for (got, want) in m.coeffs().iter().zip([0.0, -1.0, 0.0, 1.0 / 3.0]) {
        assert!((got - want).abs() < 1e-6);
    }
    assert!((eval_local(&m, &[0.5])[0] - (-0.5 + 0.125 / 3.0)).abs() < 1e-4);
    let lin = taylor_fit(f.dynamics.as_ref(), &[0.0], 2).unwrap();
    assert!((eval_local(&lin, &[0.1])[0] + 0.1).abs() < 1e-15);
}

#[test]
fn pendulum_gradient_row() {
    let f = get_system("pendulum").unwrap();
    let m = taylor_fit(f.dynamics.as_ref(), &[2.0, 2.0], 3).unwrap();
    let g = 9.81;
    let want = [-2.0 - g * 2f64.sin(), -g * 2f64.cos(), -1.0];
    for (got, w) in m.coeff_row(1).iter().zip(want) {
        assert!((got - w).abs() < 1e-5, "{got} vs {w}");
    }
    assert_eq!(m.coeff_row(0), &[2.0, 0.0, 1.0]);
}

#[test]
fn graded_lex_prefix() {
    let b = MonomialBasis::new(2, 6);
    assert_eq!(b.exponents(), &[vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]);
}

/// Values from a separate NumPy/SymPy evaluation (symbolic derivatives, RK4,
/// trapezoid).
#[test]
fn tanh_cost_curve() {
    let f = get_system("tanh").unwrap();
    let truth = rk4(f.dynamics.as_ref(), &[2.0], 0.0, 4.0, 0.01).unwrap();
    let p = LicdsParams {
        t_global: 4.0,
        dt: 0.01,
        lambda: Lambda::Auto,
        k_max: 8,
        m_max: 5,
        complexity: Complexity::Terms,
    };
    let r = licds(f.dynamics.as_ref(), &truth, &p).unwrap();
    assert!((r.lambda - 0.3027640205641129).abs() < 1e-12, "{}", r.lambda);
    let curve: Vec<f64> = r.cost_curve.iter().map(|c| c.total_cost).collect();
    for (got, want) in curve.iter().zip([1.4859880696283576, 1.1506694847651149, 1.1739538033958956, 1.3604508973944416, 1.6094955686978771]) {
        assert!((got - want).abs() < 1e-9, "{curve:?}");
    }
    assert_eq!(r.m_star, 2);
    assert_eq!(r.partitions.iter().map(|q| q.k_star).collect::<Vec<_>>(), [1, 2]);
}
