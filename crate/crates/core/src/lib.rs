//! Preconditioned generalized forward-backward splitting for large graph
//! problems of the form
//!
//! ```text
//! minimize  1/2 sum_v l2_v (x_v - y_v)^2 + sum_(u,v) d1_uv |x_u - x_v| + sum_v l1_v |x_v|
//! ```
//!
//! Each edge and each l1 vertex term is its own nonsmooth functional with an
//! auxiliary variable restricted to the coordinates it touches, so memory
//! stays linear in the graph size. Per-coordinate step sizes and weights come
//! from quadratic approximations of every term, and can be rebuilt at the
//! current iterate ("reconditioning") without losing the progress stored in
//! the auxiliary variables.
//!
//! A diagonally preconditioned primal-dual solver is included as a baseline.

// `!(a > b)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod compare;
pub mod error;
pub mod graph;
pub mod io;
pub mod ppd;
pub mod precond;
pub mod prox;
pub mod scalar;
pub mod solver;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{ActiveSets, DiagonalMetric, Edge, GraphProblem, ProblemData};
pub use precond::{GammaMode, Preconditioner, QuadApprox, WeightMode};
pub use solver::{
    solve, Algorithm, AuxiliaryVariables, ConvergenceTrace, IterRecord, PgfbSolver, Solution,
    SolverConfig, SolverState,
};
