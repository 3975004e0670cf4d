//! Joint measurability of binary qubit measurements.
//!
//! A finite set of two-outcome qubit measurements is described by biases and
//! Bloch vectors. Any joint POVM is a function on the Boolean cube whose
//! degree-one Fourier coefficients are these Bloch data; positivity of the
//! effects turns into a sum-of-norms inequality over the odd-order Fourier
//! vectors. This crate evaluates that inequality with a certified convex
//! minimizer, builds explicit joint POVMs when it holds for unbiased
//! measurements, maps qubit steering assemblages onto the same test, and
//! cross-checks everything against independent oracles.

pub mod construction;
pub mod criterion;
pub mod ensemble;
pub mod error;
pub mod fixtures;
pub mod hypercube;
pub mod oracle;
pub mod povm;
pub mod solver;
pub mod steering;

pub use error::{JmError, Result};
pub use povm::Vec3;
