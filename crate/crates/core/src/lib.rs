//! Validated numerics for the periodically forced viscous Burgers equation
//!
//! ```text
//! u_t + u u_x − u_xx = f(x, t),   x ∈ (0, 1),   u(0, t) = u(1, t) = 0
//! ```
//!
//! on a piecewise-linear finite element space, solved as a differential
//! inclusion whose width accounts for everything the finite dimensional
//! model cannot see.
//!
//! Layers, bottom up:
//!
//! | module | contents |
//! |---|---|
//! | [`interval`] | outward-rounded intervals, vectors, matrices, verified inverse |
//! | [`bounds`] | dominant-root solver, the two-inequality combiner, comparison ODE bounds |
//! | [`forcing`] | separable trigonometric forcings, their norms and FEM pairings |
//! | [`fem`] | mesh, mass/stiffness matrices, quadratic term, diagonal basis, residual widths |
//! | [`radii`] | global trapping radii for ‖∂ⁿu‖, n = 0..4 |
//! | [`local`] | per-step window and endpoint bounds, refinement |
//! | [`inclusion`] | rough enclosure, Taylor–Lohner step, inclusion correction, dissipative modes |
//! | [`driver`] | one-period integration, periodic-orbit containment check, certificates |

pub mod bounds;
pub mod config;
pub mod driver;
pub mod error;
pub mod fem;
pub mod forcing;
pub mod grid;
pub mod inclusion;
pub mod interval;
pub mod local;
pub mod radii;
pub mod scalar;

pub use error::Error;
pub use interval::{Interval, IntervalMatrix, IntervalVector};
