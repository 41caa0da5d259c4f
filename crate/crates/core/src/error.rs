//! Crate-wide error type.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// The arc set is not a directed rooted forest.
    NotAForest(String),
    /// `u_i > u_j` on some arc `(i, j)`.
    NonMonotoneBounds {
        arc: (usize, usize),
        ui: f64,
        uj: f64,
    },
    /// A bound is zero or negative after normalization.
    NonPositiveBound { vertex: usize, bound: f64 },
    /// An operation required an assumption that the instance violates.
    AssumptionViolated(String),
    /// Input vector infeasible for the instance it targets.
    InfeasibleInput(String),
    /// The oracle returned a non-finite value.
    OracleEvaluationFailure(String),
    /// Vertex sequence is not a permutation of the vertex set.
    NotAPermutation(String),
    /// A partial permutation cannot be extended to a valid one.
    InvalidPartial(String),
    /// A `t`-value denominator was not strictly positive.
    InvalidPrefix { position: usize, denominator: f64 },
    /// The permutation fails one of the validity conditions.
    InvalidPermutation(String),
    /// Point lies outside the hull description.
    NotInHull { worst_violation: f64 },
    /// Decomposition reconstruction exceeded tolerance; signals a bug or
    /// an out-of-hull input that slipped past the membership check.
    DecompositionResidual { residual: f64 },
    /// A subtree solve was requested on a vertex that is not a
    /// fractional-bound root.
    NotAPsiRoot(usize),
    /// Simplex residuals exceeded tolerance after refinement.
    NumericalFailure(String),
    /// Cutting-plane iteration cap reached before convergence.
    IterationLimit { iterations: usize },
    /// Numeric DR check found a positive violation.
    NonDrSubmodular { violation: f64 },
    /// Enumeration would exceed the configured budget.
    BudgetExceeded(String),
    /// Enumeration guard: instance too large for an exhaustive operation.
    TooLarge { size: usize, limit: usize },
    /// Malformed instance or option data.
    InvalidInput(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotAForest(why) => write!(f, "not a directed rooted forest: {why}"),
            Error::NonMonotoneBounds { arc, ui, uj } => write!(
                f,
                "bounds violate arc order on ({}, {}): {} > {}",
                arc.0, arc.1, ui, uj
            ),
            Error::NonPositiveBound { vertex, bound } => {
                write!(f, "vertex {vertex} has non-positive bound {bound}")
            }
            Error::AssumptionViolated(msg) => write!(f, "assumption violated: {msg}"),
            Error::InfeasibleInput(msg) => write!(f, "infeasible input: {msg}"),
            Error::OracleEvaluationFailure(msg) => write!(f, "oracle evaluation failed: {msg}"),
            Error::NotAPermutation(msg) => write!(f, "not a permutation: {msg}"),
            Error::InvalidPartial(msg) => write!(f, "invalid partial permutation: {msg}"),
            Error::InvalidPrefix {
                position,
                denominator,
            } => write!(
                f,
                "invalid prefix: non-positive denominator {denominator} at position {position}"
            ),
            Error::InvalidPermutation(msg) => write!(f, "invalid permutation: {msg}"),
            Error::NotInHull { worst_violation } => {
                write!(
                    f,
                    "point outside hull (worst violation {worst_violation:e})"
                )
            }
            Error::DecompositionResidual { residual } => {
                write!(f, "decomposition residual {residual:e} exceeds tolerance")
            }
            Error::NotAPsiRoot(v) => write!(f, "vertex {v} is not a fractional-bound subtree root"),
            Error::NumericalFailure(msg) => write!(f, "numerical failure: {msg}"),
            Error::IterationLimit { iterations } => {
                write!(f, "iteration cap reached after {iterations} iterations")
            }
            Error::NonDrSubmodular { violation } => {
                write!(
                    f,
                    "objective is not DR-submodular (violation {violation:e})"
                )
            }
            Error::BudgetExceeded(msg) => write!(f, "enumeration budget exceeded: {msg}"),
            Error::TooLarge { size, limit } => {
                write!(f, "instance size {size} exceeds guard limit {limit}")
            }
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
