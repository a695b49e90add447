//! Geometric programming with linear-normal uncertain random coefficients.
//!
//! Coefficients `LN(A, B)` (a linear uncertain variable with independent normal
//! endpoints) are collapsed into normal random variables by an optimistic,
//! pessimistic, or expected-value criterion. The resulting chance-constrained
//! program is made deterministic row by row, lifted back to posynomial form
//! with one auxiliary variable per square root, and solved as a convex GP
//! whose optimum is certified by the dual. Monte Carlo routines check both the
//! criterion transform and the chance constraints empirically.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gp;
pub mod parallel;
pub mod pipeline;
pub mod problem_file;
pub mod reformulate;
pub mod solver;
pub mod special;
pub mod urv;
pub mod validate;

pub use error::{Error, Result};
pub use gp::{DualProblem, DualSolution, GpProblem, Monomial, Posynomial};
pub use pipeline::{solve_urgp, sweep_alpha, PipelineSolution, SweepRow};
pub use reformulate::{DeterministicProgram, LiftedGp, StochasticGp, UrgpProblem};
pub use solver::{PrimalSolution, SolveConfig, SolveStatus};
pub use urv::{Alpha, Criterion, CriterionKind, LinearNormalUrv, LinearUncertain, NormalRv};
