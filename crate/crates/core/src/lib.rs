//! Numerical toolkit for the fourth-order cantilever boundary value problem
//!
//! ```text
//! u''''(t) = f(t, u(t)),   u(0) = u'(0) = u''(1) = u'''(1) = 0
//! ```
//!
//! on [0, 1] with a continuous nonnegative nonlinearity `f`. The crate
//! provides:
//!
//! * the closed-form Green's function of the linear operator, its pointwise
//!   bounds, and composite Gauss-Legendre quadrature ([`kernel`]);
//! * a small DSL for piecewise nonlinearities with exact antiderivatives
//!   ([`nonlinearity`]);
//! * the first eigenpair of the linear beam problem ([`eigen`]);
//! * fixed-point, monotone, and damped-Newton solvers for the equivalent
//!   integral equation ([`solver`]);
//! * energy minimization and a discrete mountain-pass search constrained to
//!   conical shells, in the curvature representation `w = u''`
//!   ([`variational`]);
//! * machine-checkable certificates for the cone-theoretic existence and
//!   multiplicity hypotheses, with explicit margins ([`certify`]).
//!
//! Every type is immutable after construction and every operation is a pure
//! function of its inputs, so values can be shared freely across threads.

// `!(x > 0.0)` rejects NaN along with nonpositive values; the plain
// comparison would let NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod eigen;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod nonlinearity;
pub mod presets;
pub mod rng;
pub mod solver;
pub mod variational;

pub use error::{Error, Result};
pub use grid::{Grid, GridFunction, QuadratureConfig};
pub use kernel::Minorant;
pub use nonlinearity::NonlinearitySpec;
pub use variational::{CurvatureRepr, ShellSpec, ShellVariant};
