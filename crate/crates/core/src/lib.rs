//! Structural analysis of differential-algebraic equation systems by the
//! signature-matrix (Σ) method, with automatic repair of analysis failures.
//!
//! When the Σ-method produces an identically singular System Jacobian, the
//! DAE can often be reformulated into an equivalent system on which the
//! analysis succeeds. This crate implements two such reformulations on the
//! diagonal blocks of the Jacobian's block triangular form:
//!
//! * the linear-combination (LC) method, which replaces one equation by a
//!   combination of differentiated equations built from a cokernel vector
//!   of a singular block, and
//! * the expression-substitution (ES) method, which introduces new
//!   variables for kernel-directed combinations of derivatives and
//!   substitutes them into the block's equations.
//!
//! Both strictly decrease the value of the signature matrix, so repeating
//! analyze-convert terminates. See [`convert::fix_dae`] for the driver.

pub mod btf;
pub mod convert;
pub mod error;
pub mod model;
pub mod numeric;
pub mod report;
pub mod structure;
pub mod symbolic;
pub mod symla;

pub use error::Error;
pub use structure::DaeSystem;
