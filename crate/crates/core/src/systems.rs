//! Registry of the benchmark systems.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use thiserror::Error;

use crate::dynamics::{Dynamics, Real};
use crate::jet::Jet;

/// Identifiers accepted by [`get_system`].
pub const SYSTEM_NAMES: &[&str] = &[
    "tanh",
    "sat",
    "tanh_lin",
    "rational",
    "tanh_sin",
    "tanh_sin5",
    "pendulum",
    "lorenz",
    "quadrotor",
];

const GRAVITY: f64 = 9.81;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown system `{name}`; valid systems: {valid}")]
pub struct UnknownSystem {
    pub name: String,
    pub valid: String,
}

/// Builtin vector fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    /// `-tanh(x)`
    Tanh,
    /// `-clamp(x, -1, 1)`
    Sat,
    /// `-tanh(x) + 0.5 x`
    TanhLin,
    /// `-x / (1 + x^2)`
    Rational,
    /// `-tanh(x) + 0.5 sin(x)`
    TanhSin,
    /// `-tanh(x) + 0.1 sin(5x)`
    TanhSin5,
    /// Damped pendulum, `x1' = x2`, `x2' = -x2 - 9.81 sin(x1)`.
    Pendulum,
    /// Lorenz system with `sigma = 10`, `beta = 8/3`, `rho = 28`.
    Lorenz,
    /// Quadrotor attitude and body-velocity model with constant wind and
    /// control torques. State `[phi, theta, p, q, r, u, v, w]`.
    Quadrotor { inertia: [f64; 3] },
}

impl Builtin {
    pub fn dim(&self) -> usize {
        match self {
            Builtin::Pendulum => 2,
            Builtin::Lorenz => 3,
            Builtin::Quadrotor { .. } => 8,
            _ => 1,
        }
    }

    /// Evaluates the field on any [`Real`] scalar.
    pub fn apply<S: Real>(&self, x: &[S]) -> Vec<S> {
        match *self {
            Builtin::Tanh => vec![-x[0].tanh()],
            Builtin::Sat => vec![-x[0].clamp_value(-1.0, 1.0)],
            Builtin::TanhLin => vec![x[0].scale(0.5) - x[0].tanh()],
            Builtin::Rational => {
                let den = (x[0].clone() * x[0].clone()).offset(1.0);
                vec![-(x[0].clone() / den)]
            }
            Builtin::TanhSin => vec![x[0].sin().scale(0.5) - x[0].tanh()],
            Builtin::TanhSin5 => vec![x[0].scale(5.0).sin().scale(0.1) - x[0].tanh()],
            Builtin::Pendulum => vec![
                x[1].clone(),
                -x[1].clone() - x[0].sin().scale(GRAVITY),
            ],
            Builtin::Lorenz => {
                let (sigma, beta, rho) = (10.0, 8.0 / 3.0, 28.0);
                let (a, b, c) = (&x[0], &x[1], &x[2]);
                vec![
                    (b.clone() - a.clone()).scale(sigma),
                    a.clone() * (-c.clone()).offset(rho) - b.clone(),
                    a.clone() * b.clone() - c.scale(beta),
                ]
            }
            Builtin::Quadrotor { inertia } => quadrotor(x, inertia),
        }
    }
}

fn quadrotor<S: Real>(x: &[S], inertia: [f64; 3]) -> Vec<S> {
    // wind forces, disturbance, wind torques, control torques, mass
    let (f_wx, f_wy, f_wz, f_t) = (1.0, 1.0, 1.0, 0.0);
    let tau_w = [1.0, 1.0, 1.0];
    let tau = [1.0, 1.0, 1.0];
    let mass = 1.0;
    let [ix, iy, iz] = inertia;
    let (phi, theta, p, q, r, u, v, w) = (
        &x[0], &x[1], &x[2], &x[3], &x[4], &x[5], &x[6], &x[7],
    );
    let (s_phi, c_phi) = (phi.sin(), phi.cos());
    let (s_theta, c_theta, t_theta) = (theta.sin(), theta.cos(), theta.tan());
    vec![
        p.clone()
            + r.clone() * c_phi.clone() * t_theta.clone()
            + q.clone() * s_phi.clone() * t_theta,
        q.clone() * c_theta.clone() - r.clone() * s_phi.clone(),
        (r.clone() * q.clone()).scale((iy - iz) / ix).offset((tau[0] + tau_w[0]) / ix),
        (p.clone() * r.clone()).scale((iz - ix) / iy).offset((tau[1] + tau_w[1]) / iy),
        (p.clone() * q.clone()).scale((ix - iy) / iz).offset((tau[2] + tau_w[2]) / iz),
        (r.clone() * v.clone() - q.clone() * w.clone() - s_theta.scale(GRAVITY))
            .offset(f_wx / mass),
        (p.clone() * w.clone() - r.clone() * u.clone()
            + (s_phi * c_theta.clone()).scale(GRAVITY))
        .offset(f_wy / mass),
        (q.clone() * u.clone() - p.clone() * v.clone() + (c_theta * c_phi).scale(GRAVITY))
            .offset((f_wz - f_t) / mass),
    ]
}

impl Dynamics for Builtin {
    fn dim(&self) -> usize {
        Builtin::dim(self)
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.apply(x));
    }

    fn eval_jet(&self, x: &[Jet]) -> Option<Vec<Jet>> {
        Some(self.apply(x))
    }
}

/// A named benchmark: dynamics plus the defaults used by the experiments.
#[derive(Clone)]
pub struct SystemSpec {
    pub name: String,
    pub builtin: Builtin,
    pub dynamics: Arc<dyn Dynamics>,
    pub default_x0: Vec<f64>,
    /// Intensity of additive white noise used when sampling training data.
    pub noise_sigma: f64,
    pub domain_bounds: Vec<(f64, f64)>,
}

impl core::fmt::Debug for SystemSpec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SystemSpec")
            .field("name", &self.name)
            .field("builtin", &self.builtin)
            .field("default_x0", &self.default_x0)
            .field("noise_sigma", &self.noise_sigma)
            .field("domain_bounds", &self.domain_bounds)
            .finish()
    }
}

impl SystemSpec {
    pub fn dim(&self) -> usize {
        self.builtin.dim()
    }

    fn from_builtin(name: &str, builtin: Builtin, x0: Vec<f64>, sigma: f64) -> Self {
        let dim = builtin.dim();
        let domain_bounds = match builtin {
            Builtin::Quadrotor { .. } => {
                let mut b = vec![(-10.0, 10.0); dim];
                b[0] = (-PI, PI);
                b[1] = (-PI, PI);
                b
            }
            // the attractor leaves [-10, 10] in every coordinate
            Builtin::Lorenz => vec![(-50.0, 50.0), (-50.0, 50.0), (-10.0, 60.0)],
            _ => vec![(-10.0, 10.0); dim],
        };
        SystemSpec {
            name: name.into(),
            builtin,
            dynamics: Arc::new(builtin),
            default_x0: x0,
            noise_sigma: sigma,
            domain_bounds,
        }
    }
}

/// Quadrotor with explicit principal inertias `[I_x, I_y, I_z]`.
pub fn quadrotor_with_inertia(inertia: [f64; 3]) -> SystemSpec {
    SystemSpec::from_builtin(
        "quadrotor",
        Builtin::Quadrotor { inertia },
        vec![-2.0, -3.0, 1.0, 3.0, 1.0, 4.0, 2.0, 1.0],
        0.0,
    )
}

pub fn get_system(name: &str) -> Result<SystemSpec, UnknownSystem> {
    let spec = match name {
        "tanh" => SystemSpec::from_builtin(name, Builtin::Tanh, vec![2.0], 0.01),
        "sat" => SystemSpec::from_builtin(name, Builtin::Sat, vec![2.0], 0.01),
        "tanh_lin" => SystemSpec::from_builtin(name, Builtin::TanhLin, vec![2.0], 0.01),
        "rational" => SystemSpec::from_builtin(name, Builtin::Rational, vec![2.0], 0.01),
        "tanh_sin" => SystemSpec::from_builtin(name, Builtin::TanhSin, vec![2.0], 0.01),
        "tanh_sin5" => SystemSpec::from_builtin(name, Builtin::TanhSin5, vec![2.0], 0.01),
        "pendulum" => SystemSpec::from_builtin(name, Builtin::Pendulum, vec![2.0, 2.0], 0.01),
        "lorenz" => SystemSpec::from_builtin(name, Builtin::Lorenz, vec![1.0, 1.0, 1.0], 0.01),
        "quadrotor" => quadrotor_with_inertia([1.0, 1.0, 1.0]),
        _ => {
            return Err(UnknownSystem {
                name: name.into(),
                valid: SYSTEM_NAMES.join(", "),
            })
        }
    };
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pendulum_equilibrium() {
        let s = get_system("pendulum").unwrap();
        assert_eq!(s.dynamics.eval_vec(&[0.0, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn tanh_at_two() {
        let s = get_system("tanh").unwrap();
        let v = s.dynamics.eval_vec(&[2.0])[0];
        assert!((v - (-0.964_027_580_075_816_9)).abs() < 1e-15);
    }

    #[test]
    fn lorenz_at_ones() {
        let s = get_system("lorenz").unwrap();
        let v = s.dynamics.eval_vec(&[1.0, 1.0, 1.0]);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[1], 26.0);
        assert!((v[2] - (1.0 - 8.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn unknown_name_lists_valid_ones() {
        let err = get_system("duffing").unwrap_err();
        let msg = alloc::format!("{err}");
        for name in SYSTEM_NAMES {
            assert!(msg.contains(name));
        }
    }

    #[test]
    fn origin_is_fixed_point() {
        for name in ["pendulum", "tanh", "sat", "tanh_lin", "rational", "tanh_sin", "tanh_sin5"] {
            let s = get_system(name).unwrap();
            let zero = vec![0.0; s.dim()];
            let v = s.dynamics.eval_vec(&zero);
            assert!(v.iter().all(|c| *c == 0.0), "{name}: {v:?}");
        }
    }

    #[test]
    fn defaults_are_consistent() {
        for name in SYSTEM_NAMES {
            let s = get_system(name).unwrap();
            assert_eq!(s.default_x0.len(), s.dim());
            assert_eq!(s.domain_bounds.len(), s.dim());
            assert!(s.noise_sigma >= 0.0);
            for (x, (lo, hi)) in s.default_x0.iter().zip(&s.domain_bounds) {
                assert!(lo <= x && x <= hi, "{name}");
            }
        }
    }

    #[test]
    fn jet_value_matches_point_eval() {
        use crate::jet::JetSpace;
        for name in SYSTEM_NAMES {
            let s = get_system(name).unwrap();
            let x: Vec<f64> = (0..s.dim()).map(|i| 0.3 + 0.2 * i as f64).collect();
            let space = JetSpace::new(s.dim(), 2);
            let jets = s.dynamics.eval_jet(&Jet::seed(&space, &x)).unwrap();
            let plain = s.dynamics.eval_vec(&x);
            for (j, p) in jets.iter().zip(&plain) {
                assert!((j.value() - p).abs() < 1e-13, "{name}");
            }
        }
    }
}
