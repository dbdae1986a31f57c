//! Calibration fields for Mumford-Shah candidates with an analytic jump curve.
//!
//! The crate builds the curvilinear chart around the jump set, assembles the
//! piecewise calibration field in chart coordinates, verifies the five
//! calibration conditions on sample grids, and computes the Steklov-type
//! capacity `K(Γ, A)` that controls graph-minimality.
//!
//! Module map:
//!
//! - [`curve_geometry`]: analytic curves, arc length, curvature, the `(ξ, η)` chart.
//! - [`analytic_kernel`]: Chebyshev series, harmonic continuation, characteristics, ODEs.
//! - [`euler_check`]: candidates and the Euler conditions.
//! - [`calibration_builder`]: parameters, the Riccati step, the field itself.
//! - [`calibration_verify`]: conditions (a)-(e) and the derivative identities.
//! - [`steklov_capacity`]: P1 finite elements for `K(Γ, A)`.
//! - [`counterexample`]: the rectangle where graph-minimality fails.
//! - [`scenario`]: config parsing and report plumbing used by the CLI.

pub mod analytic_kernel;
pub mod calibration_builder;
pub mod calibration_verify;
pub mod counterexample;
pub mod curve_geometry;
pub mod error;
pub mod euler_check;
pub mod fixtures;
pub mod par;
pub mod scenario;
pub mod steklov_capacity;

pub use error::{Error, Result};

/// Version tag written into every JSON report.
pub const SCHEMA_VERSION: &str = "1.0";
