//! Pseudospectral simulation and verification toolkit for third-order
//! semilinear dispersive equations on the 2-D torus.
//!
//! The equations have the form
//!
//! ```text
//! ∂ₜu + p(∂)u = Σⱼ aⱼ fⱼ(u),      u(0) = u₀,
//! ```
//!
//! with a third-order dispersive symbol `p(iξ)` (pure imaginary) and cubic
//! nonlinearities `f₀ = u R₁∂₁|u|²`, `f₁ = |u|²∂₁u`, `f₂ = u²∂₁ū`,
//! `f₃ = |u|²u`. The Dysthe and Hogan deep-water models are built-in presets.
//!
//! The crate provides:
//!
//! * [`grid`] — periodic grids, transforms, Fourier multipliers, Sobolev
//!   norms and dealiased products;
//! * [`symbols`] — the dispersive symbol, its homogeneous parts, the
//!   nontrapping margin and classical orbits, model presets;
//! * [`nonlinear`] — the Riesz transform with its principal/remainder split
//!   and the cubic right-hand side;
//! * [`evolution`] — the exact linear propagator and the Duhamel fixed-point
//!   (Picard) time stepper, with parabolic regularization and ε-continuation;
//! * [`gauge`] — axis profiles, the gauge symbol `e^{±γ(x,ξ)}` quantized by a
//!   direct Kohn–Nirenberg sum, the gauged energy and a sharp-Gårding probe;
//! * [`diagnostics`] — norm ledgers, the local-smoothing probe and
//!   convergence studies;
//! * [`initial`] — named analytic initial-data profiles;
//! * [`snapshot`] — the binary field snapshot format.
//!
//! A guided tour with runnable examples lives in the `book/` directory of the
//! repository; its code blocks are compiled as doctests of this crate.

pub mod diagnostics;
pub mod evolution;
pub mod gauge;
pub mod grid;
pub mod initial;
pub mod nonlinear;
pub mod snapshot;
pub mod symbols;

mod fft;

#[cfg(doctest)]
mod book;

pub use evolution::{RunConfig, Trajectory};
pub use gauge::GaugeOperator;
pub use grid::{apply_multiplier, dealiased_product, Grid2D, GridError, Multiplier, SpectralField};
pub use nonlinear::NonlinearCoefficients;
pub use num_complex::Complex64;
pub use symbols::{preset, DispersiveSymbol, ModelPreset};

