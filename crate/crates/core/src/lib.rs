//! Information geometry of low-dimensional Gaussian statistical models.
//!
//! The crate covers the chain from a Gaussian model to its complexity
//! figures:
//!
//! - [`model`]: shared-mean, shared-variance Gaussian models and their
//!   correlation templates.
//! - [`moments`]: polynomial expectations under a Gaussian, used to build
//!   the Fisher-Rao metric from score functions.
//! - [`geometry`]: metric, Christoffel symbols, Riemann tensor and sectional
//!   curvature on the `(mu, sigma)` parameter manifold.
//! - [`geodesics`]: geodesic equations, a fixed-step RK4 integrator and the
//!   closed-form geodesics.
//! - [`complexity`]: explored volumes, their time average (IGC), asymptotic
//!   coefficients, correlation ratios and the Jacobi deviation diagnostic.

// tensor code indexes several arrays per loop; `!(x > 0.0)` is used to
// reject NaN along with non-positive values
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod complexity;
pub mod error;
pub mod geodesics;
pub mod geometry;
pub mod linalg;
pub mod model;
pub mod moments;

pub use error::{Error, Result};
pub use linalg::SmallMatrix;
pub use model::{CorrelationStructure, Interval, MacroVar, ModelSpec, ThetaPoint};
pub use moments::Polynomial;
