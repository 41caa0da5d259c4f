//! Exact minimization of DR-submodular functions over mixed-integer sets
//! shaped by box constraints and monotonicity constraints on a directed
//! rooted forest.
//!
//! The feasible set couples integer and continuous variables through
//! `0 <= z <= u` and `z_i <= z_j` for every forest arc `(i, j)`. Its convex
//! hull is polyhedral (box + monotonicity + one MIR row per fractional
//! bound with integer descendants), and so is the convex hull of the
//! objective's epigraph. This crate implements that machinery end to end:
//!
//! * [`forest`]: instance model, validation, and the normalizations that
//!   are safe without loss of generality;
//! * [`hull`]: extreme points `P(S)` and the linear hull description;
//! * [`linopt`]: combinatorial linear optimization over the hull with
//!   closed-form dual certificates;
//! * [`perm`]: valid permutations, the `t`-function, and convex
//!   decomposition of hull points into chains of extreme points;
//! * [`cuts`]: epigraph inequalities and their exact separation;
//! * [`lp`]: a small dense simplex used by the master problem and as an
//!   independent cross-check of `linopt`;
//! * [`solver`]: the cutting-plane loop with integral solution recovery;
//! * [`bruteforce`]: enumeration oracles that certify everything at desk
//!   scale, plus the seeded random instance generator used in tests.

// Vertices are indices throughout (sentinel 0 holds structural zeros),
// so indexed loops over 1..=n are the natural idiom here.
#![allow(clippy::needless_range_loop)]
#![allow(clippy::type_complexity)]

pub mod bruteforce;
pub mod cuts;
pub mod error;
pub mod forest;
pub mod hull;
pub mod io;
pub mod linopt;
pub mod lp;
pub mod num;
pub mod perm;
pub mod set;
pub mod solver;
pub mod tol;

pub use error::Error;
pub use forest::ForestInstance;
pub use set::VertexSet;

/// Vertices are 1-based contiguous integers; 0 is the sentinel "virtual
/// root" with `u_0 = 0` and `z_0 = 0` used by the hull formulas.
pub type Vertex = usize;

/// A point in instance coordinates: `len == n + 1`, entry 0 is the
/// structural zero of the sentinel vertex and is never written after
/// construction.
pub type Point = Vec<f64>;
