//! Galilean Cartan connections attached to systems of second-order ODEs
//! `x'' + Γ(t, x, x') = 0`, written in normal coordinates `(t, x, y)` on the
//! first jet bundle `J¹(ℝ, ℝⁿ)`.
//!
//! The crate is layered bottom-up:
//!
//! - [`expr`]: symbolic scalar expressions in the chart variables.
//! - [`forms`]: differential forms on the `(2n+1)`-dimensional chart.
//! - [`model`]: the flat model, the matrix group `Galₙ` and `J¹ ≅ Galₙ/H`.
//! - [`connection`]: the connection forms `(τ, ω, φ, Π)`, their curvature and
//!   the invariant tensors `D`, `Q`, `P`, `T`.
//! - [`geodesy`]: geodesic integration and developments into the model.
//! - [`jetconn`]: the nonlinear-connection / covariant-derivative picture on
//!   `TJ¹` and its torsion.

pub mod connection;
pub mod expr;
pub mod forms;
pub mod geodesy;
pub mod jetconn;
pub mod model;
pub mod sampling;

pub use connection::{GalileanConnection, NormalizationChoice, SecondOrderSystem};
pub use expr::{ChartPoint, Expr, Var};
pub use forms::{DifferentialForm, TangentVector};
