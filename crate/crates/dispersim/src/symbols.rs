//! The dispersive operator `p(∂)`, its homogeneous decomposition, the
//! nontrapping condition and the deep-water model presets.
//!
//! The operator is stored through the real homogeneous parts of
//! `p(∂) = p₀(∂) + i p₁(∂) + p₂(∂) + i p₃`, with `p_j` of degree `3-j`.
//! The evolution multiplier is obtained by literal substitution `∂_j → iξ_j`
//! into this expression, which gives
//!
//! ```text
//! m(ξ) = p(iξ) = i(−p₀(ξ) − p₁(ξ) + p₂(ξ) + p₃)
//! ```
//!
//! — pure imaginary for every real coefficient set, so the free flow
//! `ĉ_k(t) = e^{−t·m(ω_k)} ĉ_k(0)` is unitary on `L²`. The substitution
//! convention removes all sign ambiguity; the real parts `p₀, p₁, p₂, p₃`
//! stay addressable for the gauge and the classical orbits.

use num_complex::Complex64;
use thiserror::Error;

use crate::grid::Multiplier;
use crate::nonlinear::NonlinearCoefficients;

#[derive(Debug, Error)]
pub enum SymbolError {
    #[error("unknown preset `{0}` (available: dysthe, hogan)")]
    UnknownPreset(String),
    #[error("preset `{name}` takes {expected} parameters, got {got}")]
    WrongParameterCount { name: &'static str, expected: usize, got: usize },
    #[error("classical orbits are defined for nonzero frequencies only")]
    ZeroFrequency,
}

/// The polynomial `p(iξ)` split into real homogeneous parts.
///
/// `p0` holds the coefficients of `ξ₁³, ξ₁²ξ₂, ξ₁ξ₂², ξ₂³`; `p1` those of
/// `ξ₁², ξ₁ξ₂, ξ₂²`; `p2` those of `ξ₁, ξ₂`; `p3` is the constant.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersiveSymbol {
    pub p0: [f64; 4],
    pub p1: [f64; 3],
    pub p2: [f64; 2],
    pub p3: f64,
}

impl DispersiveSymbol {
    pub fn new(p0: [f64; 4], p1: [f64; 3], p2: [f64; 2], p3: f64) -> Self {
        Self { p0, p1, p2, p3 }
    }

    /// Principal part `p₀(ξ)`, homogeneous of degree 3.
    pub fn eval_p0(&self, xi: [f64; 2]) -> f64 {
        let [a, b, c, d] = self.p0;
        let [x, y] = xi;
        a * x * x * x + b * x * x * y + c * x * y * y + d * y * y * y
    }

    /// Gradient `∇p₀(ξ)`, homogeneous of degree 2.
    pub fn grad_p0(&self, xi: [f64; 2]) -> [f64; 2] {
        let [a, b, c, d] = self.p0;
        let [x, y] = xi;
        [
            3.0 * a * x * x + 2.0 * b * x * y + c * y * y,
            b * x * x + 2.0 * c * x * y + 3.0 * d * y * y,
        ]
    }

    /// Second-order part `p₁(ξ)`.
    pub fn eval_p1(&self, xi: [f64; 2]) -> f64 {
        let [a, b, c] = self.p1;
        let [x, y] = xi;
        a * x * x + b * x * y + c * y * y
    }

    /// First-order part `p₂(ξ)`.
    pub fn eval_p2(&self, xi: [f64; 2]) -> f64 {
        let [a, b] = self.p2;
        a * xi[0] + b * xi[1]
    }

    /// The multiplier `m(ξ) = p(iξ)` of the linear flow `ĉ(t) = e^{−t·m} ĉ(0)`.
    pub fn evolution_multiplier(&self, xi: [f64; 2]) -> Complex64 {
        Complex64::new(
            0.0,
            -self.eval_p0(xi) - self.eval_p1(xi) + self.eval_p2(xi) + self.p3,
        )
    }

    /// The evolution multiplier as a grid-free [`Multiplier`].
    pub fn multiplier(&self) -> Multiplier {
        let sym = self.clone();
        Multiplier::new(move |w1, w2| sym.evolution_multiplier([w1, w2]))
    }

    /// Minimum of `|∇p₀|` over `samples` points of the unit circle.
    ///
    /// A strictly positive value certifies the nontrapping condition
    /// `∇p₀(ξ) ≠ 0 for ξ ≠ 0`: by homogeneity of degree 2,
    /// `|∇p₀(ξ)| ≥ margin · |ξ|²` for every `ξ`.
    pub fn nontrapping_margin(&self, samples: usize) -> f64 {
        assert!(samples >= 360, "need at least 360 circle samples");
        let mut min = f64::INFINITY;
        for i in 0..samples {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / samples as f64;
            let [gx, gy] = self.grad_p0([theta.cos(), theta.sin()]);
            let norm = (gx * gx + gy * gy).sqrt();
            if norm < min {
                min = norm;
            }
        }
        min
    }

    /// Classical orbit `x(t) = x₀ + t ∇p₀(ξ₀)`.
    pub fn classical_orbit(
        &self,
        x0: [f64; 2],
        xi0: [f64; 2],
        t: f64,
    ) -> Result<[f64; 2], SymbolError> {
        if xi0 == [0.0, 0.0] {
            return Err(SymbolError::ZeroFrequency);
        }
        let [gx, gy] = self.grad_p0(xi0);
        Ok([x0[0] + t * gx, x0[1] + t * gy])
    }
}

/// A named model: dispersive symbol plus nonlinear couplings.
#[derive(Debug, Clone)]
pub struct ModelPreset {
    pub name: String,
    pub symbol: DispersiveSymbol,
    pub coefficients: NonlinearCoefficients,
}

impl ModelPreset {
    /// The Dysthe deep-water model:
    ///
    /// ```text
    /// (∂ₜ − (1/16)(∂₁³ − 6∂₁∂₂²) + (i/8)(∂₁² − 2∂₂²) + (1/2)∂₁) u
    ///     = −(i/2) f₀(u) − (3/2) f₁(u) + (1/4) f₂(u) − (i/2) f₃(u).
    /// ```
    pub fn dysthe() -> Self {
        Self {
            name: "dysthe".to_string(),
            symbol: DispersiveSymbol::new(
                [-1.0 / 16.0, 0.0, 6.0 / 16.0, 0.0],
                [1.0 / 8.0, 0.0, -2.0 / 8.0],
                [0.5, 0.0],
                0.0,
            ),
            coefficients: NonlinearCoefficients::new(
                Complex64::new(0.0, -0.5),
                Complex64::new(-1.5, 0.0),
                Complex64::new(0.25, 0.0),
                Complex64::new(0.0, -0.5),
            ),
        }
    }

    /// The Hogan model family:
    ///
    /// ```text
    /// (∂ₜ − (b₁∂₁³ + b₂∂₁∂₂²) + i(b₃∂₁² + b₄∂₂²) + b₅∂₁) u
    ///     = −(i/2) f₀(u) + μ₁ f₁(u) + μ₂ f₂(u) + iμ₃ f₃(u).
    /// ```
    pub fn hogan(b: [f64; 5], mu: [f64; 3]) -> Self {
        Self {
            name: "hogan".to_string(),
            symbol: DispersiveSymbol::new(
                [-b[0], 0.0, -b[1], 0.0],
                [b[2], 0.0, b[3]],
                [b[4], 0.0],
                0.0,
            ),
            coefficients: NonlinearCoefficients::new(
                Complex64::new(0.0, -0.5),
                Complex64::new(mu[0], 0.0),
                Complex64::new(mu[1], 0.0),
                Complex64::new(0.0, mu[2]),
            ),
        }
    }
}

/// Looks up a preset by name.
///
/// `dysthe` takes no parameters; `hogan` takes the eight reals
/// `b₁…b₅, μ₁, μ₂, μ₃`.
pub fn preset(name: &str, params: &[f64]) -> Result<ModelPreset, SymbolError> {
    match name {
        "dysthe" => {
            if !params.is_empty() {
                return Err(SymbolError::WrongParameterCount {
                    name: "dysthe",
                    expected: 0,
                    got: params.len(),
                });
            }
            Ok(ModelPreset::dysthe())
        }
        "hogan" => {
            if params.len() != 8 {
                return Err(SymbolError::WrongParameterCount {
                    name: "hogan",
                    expected: 8,
                    got: params.len(),
                });
            }
            let b = [params[0], params[1], params[2], params[3], params[4]];
            let mu = [params[5], params[6], params[7]];
            Ok(ModelPreset::hogan(b, mu))
        }
        other => Err(SymbolError::UnknownPreset(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: literal substitution ∂_j → iξ_j into the Dysthe
    /// differential expression, carried out in complex arithmetic.
    fn dysthe_substitution_oracle(xi: [f64; 2]) -> Complex64 {
        let i = Complex64::new(0.0, 1.0);
        let d1 = i * xi[0];
        let d2 = i * xi[1];
        -(d1.powu(3) - 6.0 * d1 * d2.powu(2)) / 16.0
            + (i / 8.0) * (d1.powu(2) - 2.0 * d2.powu(2))
            + d1 / 2.0
    }

    #[test]
    fn dysthe_multiplier_matches_substitution() {
        let sym = ModelPreset::dysthe().symbol;
        assert_eq!(sym.evolution_multiplier([0.0, 0.0]), Complex64::new(0.0, 0.0));

        let m = sym.evolution_multiplier([1.0, 0.0]);
        assert_relative_eq!(m.im, 7.0 / 16.0, max_relative = 1e-15);
        assert_eq!(m.re, 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let xi = [rng.gen_range(-9.0..9.0), rng.gen_range(-9.0..9.0)];
            let got = sym.evolution_multiplier(xi);
            let want = dysthe_substitution_oracle(xi);
            assert!((got - want).norm() <= 1e-12 * (1.0 + want.norm()));
        }
    }

    #[test]
    fn multiplier_is_pure_imaginary_for_any_real_symbol() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let sym = DispersiveSymbol::new(
                [rng.gen_range(-2.0..2.0); 4].map(|_: f64| rng.gen_range(-2.0..2.0)),
                [0.0; 3].map(|_| rng.gen_range(-2.0..2.0)),
                [0.0; 2].map(|_| rng.gen_range(-2.0..2.0)),
                rng.gen_range(-2.0..2.0),
            );
            for _ in 0..100 {
                let xi = [rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0)];
                assert_eq!(sym.evolution_multiplier(xi).re, 0.0);
            }
        }
    }

    #[test]
    fn homogeneity_degrees() {
        let sym = ModelPreset::dysthe().symbol;
        let xi = [0.37, -1.21];
        for lambda in [2.0, 3.0] {
            let scaled = [lambda * xi[0], lambda * xi[1]];
            assert_relative_eq!(
                sym.eval_p0(scaled),
                lambda.powi(3) * sym.eval_p0(xi),
                max_relative = 1e-13
            );
            assert_relative_eq!(
                sym.eval_p1(scaled),
                lambda.powi(2) * sym.eval_p1(xi),
                max_relative = 1e-13
            );
            assert_relative_eq!(
                sym.eval_p2(scaled),
                lambda * sym.eval_p2(xi),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn dysthe_nontrapping_margin() {
        // Minimizing |∇p₀|² = (36 + 36c − 63c²)/256 over c = ξ₁² ∈ [0,1]
        // gives 9/256 at c = 1, i.e. margin 3/16 at ξ = (±1, 0).
        let sym = ModelPreset::dysthe().symbol;
        let margin = sym.nontrapping_margin(1440);
        assert!((margin - 0.1875).abs() <= 1e-3, "margin {margin}");
        let refined = sym.nontrapping_margin(2880);
        assert!((margin - refined).abs() <= 1e-3);
    }

    #[test]
    fn trapping_symbol_detected() {
        let sym = DispersiveSymbol::new([1.0, 0.0, 0.0, 0.0], [0.0; 3], [0.0; 2], 0.0);
        assert!(sym.nontrapping_margin(1440) <= 1e-6);
    }

    #[test]
    fn cubic_sum_margin() {
        // ∇p₀ = 3(ξ₁², ξ₂²); min of ξ₁⁴ + ξ₂⁴ on the circle is 1/2.
        let sym = DispersiveSymbol::new([1.0, 0.0, 0.0, 1.0], [0.0; 3], [0.0; 2], 0.0);
        assert_relative_eq!(
            sym.nontrapping_margin(1440),
            3.0 / 2f64.sqrt(),
            max_relative = 1e-5
        );
    }

    #[test]
    fn classical_orbits() {
        let sym = ModelPreset::dysthe().symbol;
        let x0 = [0.3, -0.7];
        assert_eq!(sym.classical_orbit(x0, [1.0, 2.0], 0.0).unwrap(), x0);

        let x = sym.classical_orbit(x0, [1.0, 0.0], 16.0).unwrap();
        assert_relative_eq!(x[0], x0[0] - 3.0, max_relative = 1e-13);
        assert_relative_eq!(x[1], x0[1], max_relative = 1e-13);

        assert!(matches!(
            sym.classical_orbit(x0, [0.0, 0.0], 1.0),
            Err(SymbolError::ZeroFrequency)
        ));

        // Escape bound from homogeneity: |x(t) − x₀| ≥ margin·|t| on |ξ₀|=1.
        let margin = sym.nontrapping_margin(1440);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let t: f64 = rng.gen_range(-30.0..30.0);
            let x = sym.classical_orbit([0.0, 0.0], [theta.cos(), theta.sin()], t).unwrap();
            let dist = (x[0] * x[0] + x[1] * x[1]).sqrt();
            assert!(dist + 1e-12 >= margin * t.abs());
        }
    }

    #[test]
    fn preset_lookup() {
        let dysthe = preset("dysthe", &[]).unwrap();
        let c = &dysthe.coefficients;
        assert_eq!(c.a0, Complex64::new(0.0, -0.5));
        assert_eq!(c.a1, Complex64::new(-1.5, 0.0));
        assert_eq!(c.a2, Complex64::new(0.25, 0.0));
        assert_eq!(c.a3, Complex64::new(0.0, -0.5));
        assert!(c.is_physical());

        let hogan = preset("hogan", &[1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        let c = &hogan.coefficients;
        assert_eq!(c.a0, Complex64::new(0.0, -0.5));
        assert_eq!(c.a1, Complex64::new(1.0, 0.0));
        assert_eq!(c.a2, Complex64::new(1.0, 0.0));
        assert_eq!(c.a3, Complex64::new(0.0, 1.0));

        assert!(matches!(preset("kdv2d", &[]), Err(SymbolError::UnknownPreset(_))));
        assert!(matches!(
            preset("hogan", &[1.0, 2.0]),
            Err(SymbolError::WrongParameterCount { .. })
        ));
        assert!(matches!(
            preset("dysthe", &[1.0]),
            Err(SymbolError::WrongParameterCount { .. })
        ));
    }
}
