//! Numeric thresholds used across the crate, in one place.
//!
//! All coefficients in play are small rationals of the input bounds, so
//! absolute tolerances are appropriate throughout.

/// Absolute row-slack tolerance for hull membership checks.
pub const MEMBERSHIP: f64 = 1e-9;

/// Decides whether a stored bound (a user input in binary64) is integral.
pub const BOUND_INTEGRALITY: f64 = 1e-9;

/// Integrality tolerance on solution coordinates.
pub const COORD_INTEGRALITY: f64 = 1e-9;

/// Band around zero inside which an `s`-value is treated as exactly zero
/// when deciding strict-negativity and the case thresholds.
pub const S_VALUE_TIE: f64 = 1e-12;

/// Allowed disagreement between the direct `t`-formula and the matrix
/// route `T z`; both are computed and compared.
pub const T_CROSS_CHECK: f64 = 1e-12;

/// Primal/dual objective agreement for certificates.
pub const DUALITY_GAP: f64 = 1e-8;

/// Primal and dual feasibility residuals accepted from the simplex.
pub const LP_RESIDUAL: f64 = 1e-9;

/// Complementary slackness residual accepted from the simplex.
pub const LP_COMPLEMENTARITY: f64 = 1e-8;

/// Cut violation above which a point is considered separated; the master
/// LP solves at `LP_RESIDUAL`, leaving two orders of magnitude of margin.
pub const SEPARATION: f64 = 1e-7;

/// Decomposition weights may dip this far below zero before being
/// clamped; reconstruction residuals are held to the same bound.
pub const DECOMPOSITION: f64 = 1e-9;

/// Two cuts with coefficients this close are merged in the master pool.
pub const CUT_DEDUP: f64 = 1e-10;

/// Decimal digits used to key memoized oracle evaluations and canonical
/// extreme-point hashes.
pub const POINT_KEY_DECIMALS: i32 = 12;
