//! Pseudo-spectral solver for the nonlocal transport equation
//! `∂ₜu + ∂ₓ(u(H[u] + b)) = ε ∂ₓₓu` on the circle and the truncated real
//! line, together with the diagnostics that verify its dissipation
//! identities, regularity estimates and long-time behaviour against exact
//! references.
//!
//! Layout:
//! * [`spectral`] — grids, transforms, singular operators, seminorms,
//!   dealiased products;
//! * [`evolution`] — integrating-factor SSP-RK3 time stepping;
//! * [`diagnostics`] — monitored functionals and the balance laws;
//! * [`oracle`] — closed-form semicircle family, Stieltjes/characteristics
//!   solver, principal-value quadrature;
//! * [`harness`] — scenarios, persistence, the acceptance-check registry and
//!   the CLI entry points.

// guards written as `!(x > 0)` deliberately reject NaN along with the
// out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod harness;
pub mod oracle;
pub mod rng;
pub mod spectral;

pub use error::{DysonError, Result};
