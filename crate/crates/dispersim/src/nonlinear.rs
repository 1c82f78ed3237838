//! The four cubic nonlinearities, the Riesz transform with its
//! principal/remainder split, and the assembled right-hand side.
//!
//! Every product is dealiased: the whole cubic pipeline runs on the doubled
//! grid (derivatives and the Riesz multiplier included) and is truncated back
//! only at the end, so each `fⱼ(u)` equals the exact spectral projection of
//! the continuum expression applied to the trigonometric interpolant.

use num_complex::Complex64;
use thiserror::Error;

use crate::grid::{
    apply_multiplier, pad_spectrum, truncate_spectrum, GridError, Multiplier, SpectralField,
};

#[derive(Debug, Error)]
pub enum NonlinearError {
    #[error("nonlinearity index must be 0..=3, got {0}")]
    IndexOutOfRange(usize),
    #[error("product estimate probe requires nonzero factors")]
    ZeroFactor,
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// The four complex couplings `a₀..a₃` in `Σ aⱼ fⱼ(u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearCoefficients {
    pub a0: Complex64,
    pub a1: Complex64,
    pub a2: Complex64,
    pub a3: Complex64,
}

impl NonlinearCoefficients {
    pub fn new(a0: Complex64, a1: Complex64, a2: Complex64, a3: Complex64) -> Self {
        Self { a0, a1, a2, a3 }
    }

    pub fn zero() -> Self {
        let z = Complex64::default();
        Self::new(z, z, z, z)
    }

    /// Physical models have pure-imaginary `a₀, a₃` and real `a₁, a₂`;
    /// exactly those coefficient sets conserve the `L²` norm.
    pub fn is_physical(&self) -> bool {
        self.a0.re == 0.0 && self.a3.re == 0.0 && self.a1.im == 0.0 && self.a2.im == 0.0
    }

    pub fn as_array(&self) -> [Complex64; 4] {
        [self.a0, self.a1, self.a2, self.a3]
    }
}

/// Smooth radial cutoff: `χ(r) = ψ(2r − 1)` with
/// `ψ(t) = e(t)/(e(t) + e(1−t))`, `e(t) = exp(−1/t)` for `t > 0` else 0.
///
/// `χ = 0` for `r ≤ 1/2`, `χ = 1` for `r ≥ 1`, monotone and `C^∞` between.
pub fn smooth_cutoff(r: f64) -> f64 {
    fn e(t: f64) -> f64 {
        if t > 0.0 {
            (-1.0 / t).exp()
        } else {
            0.0
        }
    }
    let t = 2.0 * r - 1.0;
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = e(t);
        a / (a + e(1.0 - t))
    }
}

/// Full Riesz multiplier `iξ₁/|ξ|` with principal-value zero mode.
pub fn riesz_multiplier() -> Multiplier {
    Multiplier::new(|w1, w2| {
        let norm = (w1 * w1 + w2 * w2).sqrt();
        Complex64::new(0.0, w1 / norm)
    })
    .with_zero_mode(Complex64::default())
    .with_nyquist_zeroed()
}

/// The split `R₁ = r₀(D) + R̃₁` into a smoothly cut-off principal part and a
/// low-frequency remainder.
pub struct RieszSplit {
    /// Principal part `iξ₁/|ξ| · χ(|ξ|)`.
    pub r0: Multiplier,
    /// Remainder `iξ₁/|ξ| · (1 − χ(|ξ|))`, supported on `|ξ| ≤ 1`.
    pub r_tilde: Multiplier,
}

impl RieszSplit {
    pub fn new() -> Self {
        let r0 = Multiplier::new(|w1, w2| {
            let norm = (w1 * w1 + w2 * w2).sqrt();
            Complex64::new(0.0, w1 / norm * smooth_cutoff(norm))
        })
        .with_zero_mode(Complex64::default())
        .with_nyquist_zeroed();
        let r_tilde = Multiplier::new(|w1, w2| {
            let norm = (w1 * w1 + w2 * w2).sqrt();
            Complex64::new(0.0, w1 / norm * (1.0 - smooth_cutoff(norm)))
        })
        .with_zero_mode(Complex64::default())
        .with_nyquist_zeroed();
        Self { r0, r_tilde }
    }

    /// Scalar value of the principal symbol `r₀(ξ)` (imaginary part; the
    /// symbol is `i` times this).
    pub fn r0_value(xi: [f64; 2]) -> f64 {
        let norm = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
        if norm == 0.0 {
            0.0
        } else {
            xi[0] / norm * smooth_cutoff(norm)
        }
    }
}

impl Default for RieszSplit {
    fn default() -> Self {
        Self::new()
    }
}

/// Applies `R₁ = ∂₁(−Δ)^{−1/2}` spectrally.
pub fn riesz_r1(u: &SpectralField) -> SpectralField {
    apply_multiplier(u, &riesz_multiplier()).expect("closure multipliers cannot mismatch")
}

/// Physical samples on the doubled grid, plus what the nonlinearities share.
struct PaddedState {
    big: SpectralField,      // spectral, doubled grid
    u: Vec<Complex64>,       // physical samples of u
    d1u: Vec<Complex64>,     // physical samples of ∂₁u
    abs_sq: Vec<f64>,        // |u|²
}

impl PaddedState {
    fn build(u: &SpectralField) -> Self {
        let big = pad_spectrum(u);
        let phys = big.to_physical();
        let d1 = apply_multiplier(&big, &Multiplier::derivative(1))
            .expect("closure multipliers cannot mismatch")
            .to_physical();
        let abs_sq = phys.values().iter().map(|v| v.norm_sqr()).collect();
        Self {
            big,
            u: phys.values().to_vec(),
            d1u: d1.values().to_vec(),
            abs_sq,
        }
    }

    /// `R₁∂₁|u|²` on the doubled grid (combined multiplier `−ξ₁²/|ξ|`).
    fn riesz_of_abs_sq(&self) -> Vec<Complex64> {
        let grid = self.big.grid().clone();
        let abs_field = SpectralField::from_physical(
            grid,
            self.abs_sq.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        );
        let m = Multiplier::new(|w1, w2| {
            let norm = (w1 * w1 + w2 * w2).sqrt();
            Complex64::new(-w1 * w1 / norm, 0.0)
        })
        .with_zero_mode(Complex64::default());
        apply_multiplier(&abs_field, &m)
            .expect("closure multipliers cannot mismatch")
            .to_physical()
            .values()
            .to_vec()
    }

    fn truncate(&self, values: Vec<Complex64>, target: &SpectralField) -> SpectralField {
        let padded = SpectralField::from_physical(self.big.grid().clone(), values);
        truncate_spectrum(&padded, target.grid())
    }
}

/// Evaluates the `j`-th cubic nonlinearity:
/// `f₀ = u R₁∂₁|u|²`, `f₁ = |u|²∂₁u`, `f₂ = u²∂₁ū`, `f₃ = |u|²u`.
pub fn eval_f(j: usize, u: &SpectralField) -> Result<SpectralField, NonlinearError> {
    if j > 3 {
        return Err(NonlinearError::IndexOutOfRange(j));
    }
    let state = PaddedState::build(u);
    let n = state.u.len();
    let mut out = vec![Complex64::default(); n];
    match j {
        0 => {
            let r = state.riesz_of_abs_sq();
            for i in 0..n {
                out[i] = state.u[i] * r[i];
            }
        }
        1 => {
            for i in 0..n {
                out[i] = state.abs_sq[i] * state.d1u[i];
            }
        }
        2 => {
            for i in 0..n {
                out[i] = state.u[i] * state.u[i] * state.d1u[i].conj();
            }
        }
        _ => {
            for i in 0..n {
                out[i] = state.abs_sq[i] * state.u[i];
            }
        }
    }
    Ok(state.truncate(out, u))
}

/// The assembled right-hand side `Σⱼ aⱼ fⱼ(u)`, sharing the padded
/// intermediates across the four terms.
pub fn rhs(u: &SpectralField, c: &NonlinearCoefficients) -> SpectralField {
    let state = PaddedState::build(u);
    let n = state.u.len();
    let needs_riesz = c.a0 != Complex64::default();
    let riesz = if needs_riesz { state.riesz_of_abs_sq() } else { Vec::new() };
    let mut out = vec![Complex64::default(); n];
    for i in 0..n {
        let u_i = state.u[i];
        let d1_i = state.d1u[i];
        let mut acc = c.a1 * (state.abs_sq[i] * d1_i)
            + c.a2 * (u_i * u_i * d1_i.conj())
            + c.a3 * (state.abs_sq[i] * u_i);
        if needs_riesz {
            acc += c.a0 * (u_i * riesz[i]);
        }
        out[i] = acc;
    }
    state.truncate(out, u)
}

/// Ratio `‖uv‖_{s−1} / (‖u‖_{s−1} ‖v‖_{s−1})` used to probe the algebra
/// constant of the `H^{s−1}` product estimate.
pub fn product_estimate_probe(
    u: &SpectralField,
    v: &SpectralField,
    s: f64,
) -> Result<f64, NonlinearError> {
    assert!(s > 2.0, "the product estimate needs s > 2");
    let nu = u.sobolev_norm(s - 1.0);
    let nv = v.sobolev_norm(s - 1.0);
    if nu == 0.0 || nv == 0.0 {
        return Err(NonlinearError::ZeroFactor);
    }
    let product = crate::grid::dealiased_product(&[u, v])?;
    Ok(product.sobolev_norm(s - 1.0) / (nu * nv))
}
