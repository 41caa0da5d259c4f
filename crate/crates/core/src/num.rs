//! Floor/ceiling helpers with the convention used throughout the hull
//! formulas: for integral `x`, `floor_strict(x) = x - 1` and
//! `ceil_weak(x) = x`. Standard library floor/ceil are never called
//! directly on possibly-integral values elsewhere in the crate.

use crate::tol;

/// Whether a stored bound or coordinate is integral, up to the input
/// tolerance.
pub fn is_integral(x: f64) -> bool {
    (x - x.round()).abs() <= tol::BOUND_INTEGRALITY
}

/// Largest integer strictly below `x` when `x` is integral, `floor(x)`
/// otherwise.
pub fn floor_strict(x: f64) -> f64 {
    if is_integral(x) {
        x.round() - 1.0
    } else {
        x.floor()
    }
}

/// `x` itself when `x` is integral, `ceil(x)` otherwise.
pub fn ceil_weak(x: f64) -> f64 {
    if is_integral(x) {
        x.round()
    } else {
        x.ceil()
    }
}

/// Canonical i64 key for a float rounded to [`tol::POINT_KEY_DECIMALS`]
/// digits; used to hash points.
pub fn key_digit(x: f64) -> i64 {
    let scale = 10f64.powi(tol::POINT_KEY_DECIMALS);
    (x * scale).round() as i64
}

/// Canonical key for a whole point.
pub fn point_key(z: &[f64]) -> Vec<i64> {
    z.iter().map(|&x| key_digit(x)).collect()
}
