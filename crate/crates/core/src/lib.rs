//! First-order optimization under self-bounding smoothness.
//!
//! An objective `F` is self-bounding when `‖∇²F(w)‖ ≤ ρ₁(F(w))` for some
//! non-decreasing `ρ₁`. Every step size and block length in this crate is
//! derived from a [`calculus::SelfBoundingProfile`] evaluated at the initial
//! function value, and every algorithm is expressed as a
//! [`framework::DecreaseProcedure`] executed by a single generic driver.
//!
//! Layout, bottom up:
//!
//! - [`numerics`]: Jacobi eigensolver, adaptive quadrature, seeded RNG streams.
//! - [`calculus`]: profiles and the effective constants derived from them.
//! - [`problems`]: the objective catalog with certified profiles.
//! - [`oracles`]: exact and noisy gradient oracles.
//! - [`framework`]: the decrease-procedure trait and the driver.
//! - [`optimizers`]: GD, Adaptive GD, block SGD, Perturbed GD, Restarted SGD.
//! - [`stationarity`]: FOSP/SOSP certificates.

pub mod calculus;
pub mod framework;
pub mod numerics;
pub mod optimizers;
pub mod oracles;
pub mod problems;
pub mod stationarity;

pub use numerics::{RngState, SymMatrix, Vector};
