//! Named analytic initial-data profiles.
//!
//! All profiles are band-limited by construction on the grids they are meant
//! for: the Gaussian envelopes decay below machine epsilon both at the torus
//! seam and beyond the retained frequency window, so periodization and
//! truncation effects are negligible.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{Grid2D, SpectralField};

/// Shortest displacement from `c` to `x` on a circle of length `l`.
fn min_image(x: f64, c: f64, l: f64) -> f64 {
    let mut d = (x - c) % l;
    if d < -l / 2.0 {
        d += l;
    } else if d >= l / 2.0 {
        d -= l;
    }
    d
}

/// Gaussian wave packet `A · e^{-|x-c|²/(2w²)} · e^{i ξ₀·(x-c)}`.
///
/// The envelope is evaluated through the minimum-image displacement, so the
/// packet is centred at `center` with `1/e²` radius `2w`.
pub fn gaussian_packet(
    grid: &Grid2D,
    amplitude: f64,
    center: [f64; 2],
    carrier: [f64; 2],
    width: f64,
) -> SpectralField {
    assert!(width > 0.0, "packet width must be positive");
    let l1 = grid.l1();
    let l2 = grid.l2();
    SpectralField::from_fn(grid.clone(), move |x1, x2| {
        let d1 = min_image(x1, center[0], l1);
        let d2 = min_image(x2, center[1], l2);
        let envelope = (-(d1 * d1 + d2 * d2) / (2.0 * width * width)).exp();
        let phase = carrier[0] * d1 + carrier[1] * d2;
        Complex64::from_polar(amplitude * envelope, phase)
    })
}

/// Single-mode plane wave `a · e^{i ω_k · x}`.
pub fn plane_wave(grid: &Grid2D, amplitude: Complex64, k: [i64; 2]) -> SpectralField {
    SpectralField::from_modes(grid.clone(), &[(k[0], k[1], amplitude)])
}

/// Seeded random field supported on modes `|k₁|, |k₂| ≤ kmax`, with smooth
/// coefficient decay `⟨k⟩⁻⁴`. Rescale with [`SpectralField::scale`] to hit a
/// target norm.
pub fn random_band_limited(grid: &Grid2D, kmax: i64, seed: u64) -> SpectralField {
    assert!(kmax >= 1 && kmax < (grid.n1() / 2) as i64 && kmax < (grid.n2() / 2) as i64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modes = Vec::new();
    for k1 in -kmax..=kmax {
        for k2 in -kmax..=kmax {
            let decay = (1.0 + (k1 * k1 + k2 * k2) as f64).powi(-2);
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            modes.push((k1, k2, decay * c));
        }
    }
    SpectralField::from_modes(grid.clone(), &modes)
}

/// Smooth compactly concentrated window: the standard `C^∞` bump
/// `exp(1 − 1/(1 − r²))` of the scaled minimum-image radius, 1 at the
/// center and identically 0 outside `radius`.
pub fn bump_window(grid: &Grid2D, center: [f64; 2], radius: f64) -> SpectralField {
    assert!(radius > 0.0);
    let l1 = grid.l1();
    let l2 = grid.l2();
    SpectralField::from_fn(grid.clone(), move |x1, x2| {
        let d1 = min_image(x1, center[0], l1);
        let d2 = min_image(x2, center[1], l2);
        let r_sq = (d1 * d1 + d2 * d2) / (radius * radius);
        if r_sq < 1.0 {
            Complex64::new((1.0 - 1.0 / (1.0 - r_sq)).exp(), 0.0)
        } else {
            Complex64::default()
        }
    })
}
