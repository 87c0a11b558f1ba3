//! Solvers for nonsymmetric algebraic T-Riccati equations
//! `D X + X^T A - X^T B X + C = 0` with real `n x n` coefficients.
//!
//! Every solver works through the associated 2n x 2n T-palindromic pencil
//! `phi(z) = M + z M^T`, whose stable deflating subspace carries the
//! stabilizing solution as a graph `[I; X]`. The crate provides:
//!
//! - [`kernels`]: the dense linear-algebra contract (QR, rank-revealing QR,
//!   ordered generalized Schur, linear solves) everything else builds on;
//! - [`pencil`]: the problem/pencil data model, residual metrics and
//!   solution extraction from subspace bases;
//! - [`antitri`]: antitriangular forms under unitary T-congruence, the
//!   O(n^3) eigenvalue reordering by swaps and the palindromic QZ solver;
//! - [`iterative`]: doubling, cyclic-reduction and Newton solvers plus the
//!   unstructured QZ baseline;
//! - [`contour`]: the trapezoidal spectral-projector solver and its two
//!   independent algebraic oracles;
//! - [`analysis`]: checkers for the no-critical-eigenvalue and solvability
//!   conditions;
//! - [`bench`]: problem generators, the experiment suites and the swap
//!   timing benchmark behind the `tnare` CLI.

pub mod analysis;
pub mod antitri;
pub mod bench;
pub mod contour;
pub mod error;
pub mod iterative;
pub mod kernels;
pub mod pencil;

pub use error::{Error, Result};
pub use kernels::{DenseMatrix, PencilEig, UNIT_ROUNDOFF};
pub use pencil::{PalindromicPencil, SolveReport, TNareProblem};

/// Default relative stopping tolerance for the iterative solvers: `2 n u`.
pub fn default_eps(n: usize) -> f64 {
    2.0 * n as f64 * UNIT_ROUNDOFF
}

/// Default iteration budget for the iterative solvers.
pub const DEFAULT_MAXIT: usize = 64;
