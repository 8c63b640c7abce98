//! Locally field-aligned discontinuous Galerkin discretization of the
//! periodic anisotropic wave eigenproblem
//!
//! ```text
//! -div( B (B . grad phi) ) = omega^2 alpha phi,   B = beta(x) b,   x in [0, 2 pi)^2
//! ```
//!
//! The pipeline is
//!
//! 1. [`geometry`]: cartesian or locally field-aligned periodic meshes with
//!    resolved (possibly non-conforming) interfaces,
//! 2. [`basis`]: tensor Legendre bases and Gauss rules on the reference square,
//! 3. [`fields`]: coefficient fields `alpha`, `beta` as truncated Fourier series,
//! 4. [`assembly`]: the LDG operator blocks and the reduced symmetric operator,
//! 5. [`eigensolve`]: band eigensolver certified by an inertia count,
//! 6. [`spectrum`]: analytic spectrum, Fourier-mode association and error tables,
//! 7. [`cli`]: configuration files, study drivers and CSV output.
//!
//! See the crate `examples/` directory for one runnable program per capability.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod basis;
pub mod cli;
pub mod eigensolve;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod linalg;
pub mod spectrum;

pub use error::{Error, Result};

/// Side length of the periodic domain.
pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
