//! Backward-error analysis for generalized saddle point problems
//!
//! ```text
//! [ E  F* ] [ u ]   [ q ]
//! [ H  G  ] [ p ] = [ r ]
//! ```
//!
//! The crate computes the classical normwise unstructured backward error of a
//! computed solution, the structured backward errors that constrain the
//! perturbations to respect Hermitian blocks and (optionally) the sparsity
//! pattern of the coefficient matrix, and reconstructs the optimal backward
//! perturbations attaining them. Reference GMRES and Gaussian-elimination
//! solvers plus embedded fixtures support solver stability studies.
//!
//! All types are immutable after construction and every operation is a pure
//! function, so concurrent use needs no synchronization.

#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod matrix;
pub mod problems;
pub mod qr;
pub mod solvers;
pub mod structured;
pub mod system;
pub mod unstructured;
pub mod vecops;

pub use error::{Error, Result};
pub use matrix::{CMat, RMat};
pub use problems::{gen_random_sparse, gen_stokes_like, load_fixture, Fixture, FixtureId};
pub use solvers::{gepp_solve, gmres, stability_report, SolveMethod, SolveTrace, StabilityReport};
pub use structured::{
    assemble, compute_structured_be, min_norm_solve, reconstruct_perturbations, reduce_real,
    verify_perturbation, AssembledSystem, ColumnLayout, MinNormSolver, PerturbationDiagnostics,
};
pub use system::{
    default_relative_weights, derive_pattern, weighted_norm, BackwardErrorReport,
    CandidateSolution, GsppSystem, PerturbationSet, SparsityPattern, StructureCase, Weight,
    Weights,
};
pub use unstructured::{residuals, rigal_gaches, ResidualPair};
