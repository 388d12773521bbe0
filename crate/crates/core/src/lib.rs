//! Numerical laboratory for the superradiant phase transition (SPT) of a
//! qubit coupled to a mechanical mode, with a quadratic field term that an
//! auxiliary optomechanical cavity can counteract.
//!
//! The crate builds the relevant Hamiltonians in a truncated Fock basis,
//! diagonalizes them (dense or Lanczos), and extracts the order parameters
//! of the transition: phonon occupation, the equal-time correlation
//! `g²(0)`, symmetry-broken coherences and higher-order quadrature
//! moments. Closed-form results for both phases are implemented alongside
//! independent Gaussian-state oracles so every analytic expression can be
//! cross-checked against exact diagonalization.
//!
//! Modules:
//! - [`hilbert`] — truncated Fock/qubit operator algebra (sparse matrices).
//! - [`model`] — physical parameter sets, the squeezed frame, and all
//!   Hamiltonian builders.
//! - [`analytic`] — closed-form phase solutions, Gaussian moment oracles,
//!   squeezing thresholds.
//! - [`spectra`] — eigensolvers and truncation-convergence control.
//! - [`observables`] — expectation values, correlation reports, quadrature
//!   moments, phase classification.
//! - [`cli`] — configuration, sweep runners and CSV/JSON writers behind the
//!   `sptlab` binary.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod hilbert;
pub mod model;
pub mod observables;
pub mod spectra;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
