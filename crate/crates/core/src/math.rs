// Elementary functions routed through libm so results do not depend on
// whether the crate is built with or without `std`.

#[inline]
pub(crate) fn tanh(x: f64) -> f64 {
    libm::tanh(x)
}

#[inline]
pub(crate) fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub(crate) fn tan(x: f64) -> f64 {
    libm::tan(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub(crate) fn powi(x: f64, n: i32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..n.unsigned_abs() {
        acc *= x;
    }
    if n < 0 {
        1.0 / acc
    } else {
        acc
    }
}

/// Euclidean norm of `a - b`.
pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    sqrt(dist_sq(a, b))
}

pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Composite trapezoid rule on a uniform grid.
pub(crate) fn trapezoid(values: impl ExactSizeIterator<Item = f64>, dt: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    for (i, v) in values.enumerate() {
        if i == 0 || i == n - 1 {
            acc += 0.5 * v;
        } else {
            acc += v;
        }
    }
    acc * dt
}

/// Number of `dt` steps covering `horizon`, or `None` when `horizon / dt` is
/// not an integer up to rounding noise.
pub(crate) fn step_count(horizon: f64, dt: f64) -> Option<usize> {
    if !(horizon > 0.0 && dt > 0.0) || !horizon.is_finite() || !dt.is_finite() {
        return None;
    }
    let ratio = horizon / dt;
    let n = round(ratio);
    if n < 1.0 || abs(ratio - n) > 1e-9 * n.max(1.0) {
        return None;
    }
    Some(n as usize)
}
