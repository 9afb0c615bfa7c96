//! Float helpers that `core` does not provide.

use core::f64::consts::PI;

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

/// Wraps an angle into `(-pi, pi]`.
pub(crate) fn wrap_angle(theta: f64) -> f64 {
    let mut t = libm::remainder(theta, 2.0 * PI);
    if t <= -PI {
        t += 2.0 * PI;
    }
    t
}

/// `ceil(x)` that ignores representation error just above an integer,
/// e.g. `0.4 * 100.0 == 40.00000000000001`.
pub(crate) fn ceil_tolerant(x: f64) -> f64 {
    let nearest = libm::round(x);
    if (x - nearest).abs() <= 1e-9 * nearest.abs().max(1.0) {
        nearest
    } else {
        libm::ceil(x)
    }
}
