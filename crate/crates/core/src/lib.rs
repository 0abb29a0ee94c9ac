//! Generalized eigenvalue problems `A v = λ B v` with structured leading
//! eigenvectors.
//!
//! The main estimator is the projected Rayleigh flow ([`solvers::prfm`]):
//! a gradient step on the Rayleigh quotient followed by a projection onto a
//! prior set (sphere, sparse vectors, a subspace, or the range of a small
//! generative network). Around it sit an exact dense solver, synthetic
//! problem generators, theory diagnostics and an experiment harness.

// Negated comparisons are deliberate (they also reject NaN); index loops
// mirror the matrix formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod generative;
pub mod harness;
pub mod linalg;
pub mod priors;
pub mod problems;
pub mod rng;
pub mod solvers;
pub mod theory;

pub use error::{Error, Result};
pub use generative::{Activation, Generator, LatentProjectionConfig, MlpGenerator, SubspaceGenerator};
pub use harness::{ResultRow, SolverChoice, SweepSpec};
pub use linalg::{GeneralizedSpectrum, Matrix, MatrixPair, SymMatrix};
pub use priors::{Projector, ProjectorSpec};
pub use problems::{ProblemInstance, ProblemKind, Truth};
pub use rng::SeededStream;
pub use solvers::{RunTrace, SolverConfig, SolverKind};
pub use theory::ConvergenceConditions;
