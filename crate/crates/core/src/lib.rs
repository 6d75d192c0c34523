//! Solvers and verification tools for monotone inclusions `0 ∈ M(z) + F(z)`
//! with `M` maximally monotone and `F` monotone and Lipschitz continuous.
//!
//! The centerpiece is the fast reflected forward-backward iteration, which
//! combines a reflected forward step with Nesterov momentum and a correction
//! term, next to the classical splitting baselines. The [`analysis`] module
//! evaluates the Lyapunov energies behind its `o(1/k)` rates, and [`bench`]
//! builds the l1-regularized chain QP used for comparisons.

pub mod analysis;
pub mod bench;
pub mod numkit;
pub mod operators;
pub mod primal_dual;
pub mod problem;
pub mod splitters;

pub use numkit::{SparseMatrix, Vector};
pub use operators::{ConeKind, ForwardKind, ForwardOp, MonotoneOp};
pub use problem::{CountingOracle, Oracle, ProblemInstance};
pub use splitters::{Form, Method, SolverConfig, StoppingRule};
