//! Finite-sample spectral diagnostics of embedding matrices.
//!
//! A learned representation is summarized by the spectrum of its empirical
//! covariance. With N samples in D dimensions that spectrum is perturbed at
//! the operator-norm scale √(D/N), which bounds how many eigenmodes are
//! recoverable (K(N)), how many carry class signal (k(N)), how far the
//! estimated subspaces rotate (Davis–Kahan), and how much Mahalanobis
//! separation — hence Gaussian AUC — survives. This crate computes all of
//! those quantities, calibrates unstable spectral tails with a power-law
//! splice (the zeta filter), and ships a synthetic Gaussian lab that checks
//! every scaling law against known population truth.
//!
//! Modules:
//! - [`matrix`]: centering, covariance, Jacobi eigendecomposition, operator
//!   norms, principal angles.
//! - [`diagnostics`]: effective rank, noise floors, K(N), k(N), power-law
//!   slope, zeta sums, Davis–Kahan bound.
//! - [`separation`]: Mahalanobis energy, Fisher directions, Gaussian and
//!   empirical ROC-AUC.
//! - [`zeta_filter`]: spectral tail calibration.
//! - [`synth`]: seeded generators with closed-form truth and the Monte-Carlo
//!   sweep harness (rayon-parallel with the `parallel` feature, identical
//!   output sequentially).
//! - [`report`]: assembly of the full diagnostics report.

pub mod diagnostics;
pub mod error;
pub mod matrix;
pub mod report;
pub mod rng;
pub mod separation;
pub mod synth;
pub mod zeta_filter;

pub use error::{Result, SpectralError};
