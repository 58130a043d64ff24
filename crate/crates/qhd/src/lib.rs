//! Quantum hydrodynamics on anisotropic tori, at desk scale.
//!
//! The crate follows one analytical pipeline end to end:
//!
//! 1. [`madelung`] — the change of variables `psi = sqrt(m + rho) e^{i phi / hbar}`
//!    turning the hydrodynamic pair `(rho, phi)` into a nonlinear
//!    Schroedinger field, plus the gauge reduction `(alpha, theta, z)` that
//!    closes the dynamics on the nonzero modes.
//! 2. [`diagonalization`] — the per-mode symplectic matrices taking the
//!    linearized system to diagonal form with frequencies
//!    `omega(j) = sqrt(kappa |j|^4_a + m g'(m) |j|^2_a)` ([`dispersion`]).
//! 3. [`trilinear`] / [`hamiltonian`] — the cubic coefficient algebra:
//!    momentum-conserving tables, splits, adjoint action and its inverse,
//!    Poisson brackets, and the cubic Taylor coefficients of the reduced
//!    Hamiltonian.
//! 4. [`energy`] — the cubic correction `E_3` and the modified energy
//!    `E_s = N_s + E_3` whose time derivative loses the cubic terms.
//! 5. [`divisors`] — exhaustive scans of `sum_i sigma_i omega(j_i)` over the
//!    lattice, lower-bound fits, regime classification, and Monte Carlo
//!    measure estimates in the anisotropy parameters.
//! 6. [`integrator`] — Strang split-step integration of the NLS flow with
//!    conservation monitors; the trajectory source for every dynamic test.
//! 7. [`experiments`] — batch experiments (lifespan sweeps, drift
//!    comparisons, divisor campaigns) with CSV/JSON emission.
//!
//! The `examples/` directory contains one runnable program per capability;
//! the thin `qhd` binary drives the batch experiments from a TOML config.

pub mod diagonalization;
pub mod dispersion;
pub mod divisors;
pub mod energy;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod hamiltonian;
pub mod integrator;
pub mod lattice;
pub mod madelung;
pub mod spectral;
pub mod trilinear;

pub use dispersion::{ModelParams, SignPattern};
pub use error::{Error, Result};
pub use grid::GridField;
pub use lattice::{LatticePoint, TorusShape};
pub use spectral::SpectralField;
