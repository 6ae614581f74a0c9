//! Dirichlet-confined low-lying eigenvalues of semiclassical Schrödinger
//! operators on a line and in the radial reduction, computed by shooting,
//! together with the leading tunneling-shift asymptotics they are compared to.
//!
//! ```
//! use confine_core::potential::{ConfinementDomain, PotentialKind, PotentialSpec};
//! use confine_core::shooting::ModeSpec;
//! use confine_core::spectra::confined_eigenvalue;
//!
//! let p = PotentialSpec::harmonic(PotentialKind::Line);
//! let domain = ConfinementDomain::symmetric(1.0).unwrap();
//! let mode = ModeSpec::line(0, 0.1).unwrap();
//! let e = confined_eigenvalue(&p, &domain, &mode).unwrap();
//! assert!(e.value > 0.1);
//! ```
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agmon;
pub mod asymptotics;
mod dop853;
pub mod dsl;
pub mod exec;
pub mod ode;
pub mod potential;
pub mod quadrature;
pub mod report;
pub mod scaled;
pub mod shooting;
pub mod special;
pub mod spectra;
mod tridiag;

pub use scaled::ScaledValue;
