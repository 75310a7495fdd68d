//! Solver for the generalized Chern-Simons vortex equation
//!
//! ```text
//! Laplacian(u) = lambda * e^u (e^{bu} - 1) + 4*pi * sum_j delta_{p_j}
//! ```
//!
//! on finite connected weighted graphs, where `lambda, b > 0` and the
//! `p_j` are vortex vertices carrying Dirac masses.
//!
//! Splitting `u = u0 + v` against the background field `u0` (which
//! absorbs the Dirac data) reduces the problem to a semilinear equation
//! for `v`. The crate provides:
//!
//! * the discrete calculus of weighted graphs ([`graph`]);
//! * exact-contract linear solves against the mu-Laplacian ([`linalg`]);
//! * the scalar nonlinearity and equation residual ([`nonlinearity`]);
//! * the monotone scheme computing maximal solutions and detecting
//!   non-existence ([`monotone`]);
//! * bracketing and bisection of the critical coupling `lambda_c`
//!   ([`critical`]);
//! * the variational machinery producing a second solution above the
//!   critical coupling ([`variational`]).

pub mod critical;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod linalg;
pub mod monotone;
pub mod nonlinearity;
pub mod report;
pub mod variational;

pub use error::{Error, Result};
pub use graph::{
    dirac_mass, grad_norm, gradient_form, integrate, laplacian, FiniteGraph, VertexFunction,
    VortexSet,
};
pub use linalg::{
    poincare_constant, solve_poisson_mean_zero, solve_shifted, spectral_gap, LinearSolveOptions,
};
pub use monotone::{
    compute_u0, iterate_scheme, solve_at_critical, verify_maximum_principle, MonotoneOptions,
    SolveReport, SolveStatus,
};
pub use nonlinearity::{
    classify_sub_super, f_eval, f_min, f_prime, lambda_lower_bound, residual, BackgroundField,
    Problem, SubSuperClass,
};
pub use critical::{bisect, lambda_sweep, upper_bracket, BisectOptions, CriticalLambdaResult};
pub use variational::{
    find_two_solutions, functional_j, grad_j, minimize_over_sigma, mountain_pass,
    MountainPassOptions, MultiplicityResult, ObstacleSet, TwoSolutionRoute,
};
