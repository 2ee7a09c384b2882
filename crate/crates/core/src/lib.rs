//! Numerical evaluation of Selberg-type integrals and series for sl2 and
//! sl3, and certification of the closed-form identities they satisfy.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: log-signed arithmetic and gamma primitives.
//! - [`closed_forms`]: the gamma-product right-hand sides.
//! - [`integrands`]: master functions, rational weights, lattice limits.
//! - [`lattice_series`]: cone enumeration and truncated series.
//! - [`quadrature`]: Gauss-Jacobi rules and sector decomposition of the
//!   ordered simplex.
//! - [`chains`]: interleaving domains, chain coefficients, chain integrals.
//! - [`recursions`]: the linear system relating the `J` integrals.
//! - [`identity_suite`]: the verification registry.

pub mod chains;
pub mod closed_forms;
pub mod error;
pub mod identity_suite;
pub mod integrands;
pub mod lattice_series;
pub mod numerics;
pub mod quadrature;
pub mod recursions;

pub use closed_forms::ParamSet;
pub use error::{Error, Result};
pub use identity_suite::{IdentityId, VerificationRecord};
pub use numerics::LogSigned;
