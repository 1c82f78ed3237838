//! Periodic grid, transform pair, Fourier multipliers, Sobolev norms and
//! dealiased products.
//!
//! Everything else in the crate is built on the conventions fixed here:
//!
//! * fields live on a torus `[0,l1) × [0,l2)` sampled at `n1 × n2` points,
//!   stored row-major with axis 1 contiguous;
//! * the coefficient convention is `u(x) = Σ_k c_k e^{i ω_k · x}` with
//!   `c_k = (1/(n1·n2)) Σ_j u(x_j) e^{-i ω_k · x_j}` and dual frequencies
//!   `ω_k = 2πk/l`, `k ∈ {-n/2, …, n/2-1}`;
//! * Parseval then reads `(l1·l2/(n1·n2)) Σ_j |u(x_j)|² = l1·l2 Σ_k |c_k|²`,
//!   carrying the geometric factor `l1·l2` explicitly.
//!
//! Cubic nonlinearities are dealiased by zero-padding to twice the resolution
//! per axis, which is exact for products of up to three factors.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::fft;

/// Errors from grid construction and grid-bound operations.
#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid sizes must be even, got {0}x{1}")]
    OddSize(usize, usize),
    #[error("grid sizes must be at least 8, got {0}x{1}")]
    TooSmall(usize, usize),
    #[error("torus side lengths must be positive, got {0}x{1}")]
    NonPositiveLength(f64, f64),
    #[error("operands live on different grids: {0} vs {1}")]
    GridMismatch(GridShape, GridShape),
    #[error("dealiased products take 2 or 3 factors, got {0}")]
    BadFactorCount(usize),
}

/// Compact grid description used in error messages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridShape {
    pub n1: usize,
    pub n2: usize,
    pub l1: f64,
    pub l2: f64,
}

impl fmt::Display for GridShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{} on [0,{})x[0,{})", self.n1, self.n2, self.l1, self.l2)
    }
}

/// A uniform periodic grid together with its dual frequencies.
#[derive(Debug, Clone)]
pub struct Grid2D {
    n1: usize,
    n2: usize,
    l1: f64,
    l2: f64,
    omega1: Arc<[f64]>,
    omega2: Arc<[f64]>,
}

impl PartialEq for Grid2D {
    fn eq(&self, other: &Self) -> bool {
        self.n1 == other.n1 && self.n2 == other.n2 && self.l1 == other.l1 && self.l2 == other.l2
    }
}

fn dual_frequencies(n: usize, l: f64) -> Arc<[f64]> {
    let step = 2.0 * std::f64::consts::PI / l;
    (0..n)
        .map(|i| {
            let k = if i < n / 2 { i as i64 } else { i as i64 - n as i64 };
            step * k as f64
        })
        .collect()
}

impl Grid2D {
    /// Builds a grid with `n1 × n2` points on `[0,l1) × [0,l2)`.
    ///
    /// Sizes must be even and at least 8; lengths must be positive.
    pub fn new(n1: usize, n2: usize, l1: f64, l2: f64) -> Result<Self, GridError> {
        if n1 % 2 != 0 || n2 % 2 != 0 {
            return Err(GridError::OddSize(n1, n2));
        }
        if n1 < 8 || n2 < 8 {
            return Err(GridError::TooSmall(n1, n2));
        }
        if !(l1 > 0.0) || !(l2 > 0.0) {
            return Err(GridError::NonPositiveLength(l1, l2));
        }
        Ok(Self {
            n1,
            n2,
            l1,
            l2,
            omega1: dual_frequencies(n1, l1),
            omega2: dual_frequencies(n2, l2),
        })
    }

    /// Square torus `[0,2π)²`, the default domain.
    pub fn square(n: usize) -> Result<Self, GridError> {
        let l = 2.0 * std::f64::consts::PI;
        Self::new(n, n, l, l)
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    pub fn l2(&self) -> f64 {
        self.l2
    }

    /// Number of grid points (= number of retained modes).
    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn shape(&self) -> GridShape {
        GridShape { n1: self.n1, n2: self.n2, l1: self.l1, l2: self.l2 }
    }

    /// Dual frequencies along axis 1 in storage order.
    pub fn omega1(&self) -> &[f64] {
        &self.omega1
    }

    /// Dual frequencies along axis 2 in storage order.
    pub fn omega2(&self) -> &[f64] {
        &self.omega2
    }

    /// Frequency pair at flat index `idx`.
    pub fn frequency(&self, idx: usize) -> [f64; 2] {
        [self.omega1[idx % self.n1], self.omega2[idx / self.n1]]
    }

    /// Physical coordinates of grid point `(i1, i2)`.
    pub fn point(&self, i1: usize, i2: usize) -> [f64; 2] {
        [
            self.l1 * i1 as f64 / self.n1 as f64,
            self.l2 * i2 as f64 / self.n2 as f64,
        ]
    }

    /// Flat index of grid point / mode `(i1, i2)`.
    pub fn index(&self, i1: usize, i2: usize) -> usize {
        i2 * self.n1 + i1
    }

    /// Quadrature weight of the uniform grid, `l1·l2/(n1·n2)`.
    pub fn cell_area(&self) -> f64 {
        self.l1 * self.l2 / (self.n1 * self.n2) as f64
    }

    /// Storage index of the integer mode `(k1, k2)`, if it is retained.
    pub fn mode_index(&self, k1: i64, k2: i64) -> Option<usize> {
        let half1 = (self.n1 / 2) as i64;
        let half2 = (self.n2 / 2) as i64;
        if k1 < -half1 || k1 >= half1 || k2 < -half2 || k2 >= half2 {
            return None;
        }
        let i1 = k1.rem_euclid(self.n1 as i64) as usize;
        let i2 = k2.rem_euclid(self.n2 as i64) as usize;
        Some(self.index(i1, i2))
    }

    fn doubled(&self) -> Grid2D {
        Grid2D::new(2 * self.n1, 2 * self.n2, self.l1, self.l2)
            .expect("doubling an admissible grid stays admissible")
    }
}

/// Which of the two paired representations the value buffer holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    /// Samples `u(x_j)` at the grid points.
    Physical,
    /// Coefficients `c_k` of `Σ c_k e^{i ω_k · x}`.
    Spectral,
}

/// A complex scalar field on a [`Grid2D`], in physical or spectral form.
///
/// Fields are immutable values: every operation returns a new field, and a
/// field can be sent freely between threads.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Grid2D,
    values: Vec<Complex64>,
    repr: Representation,
}

impl SpectralField {
    /// Wraps physical samples; the buffer length must match the grid.
    pub fn from_physical(grid: Grid2D, values: Vec<Complex64>) -> Self {
        assert_eq!(values.len(), grid.len(), "field buffer does not match grid");
        Self { grid, values, repr: Representation::Physical }
    }

    /// Wraps spectral coefficients in storage order.
    pub fn from_spectral(grid: Grid2D, values: Vec<Complex64>) -> Self {
        assert_eq!(values.len(), grid.len(), "field buffer does not match grid");
        Self { grid, values, repr: Representation::Spectral }
    }

    /// The zero field (spectral representation).
    pub fn zero(grid: Grid2D) -> Self {
        let values = vec![Complex64::default(); grid.len()];
        Self { grid, values, repr: Representation::Spectral }
    }

    /// Builds a field from a list of integer modes `(k1, k2, c)`.
    ///
    /// Modes outside the retained window are rejected by panic; this is a
    /// test and initial-data helper, not an I/O path.
    pub fn from_modes(grid: Grid2D, modes: &[(i64, i64, Complex64)]) -> Self {
        let mut values = vec![Complex64::default(); grid.len()];
        for &(k1, k2, c) in modes {
            let idx = grid
                .mode_index(k1, k2)
                .unwrap_or_else(|| panic!("mode ({k1},{k2}) not representable on {}", grid.shape()));
            values[idx] += c;
        }
        Self { grid, values, repr: Representation::Spectral }
    }

    /// Evaluates `f` at every grid point.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i2 in 0..grid.n2() {
            for i1 in 0..grid.n1() {
                let [x1, x2] = grid.point(i1, i2);
                values.push(f(x1, x2));
            }
        }
        Self { grid, values, repr: Representation::Physical }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    /// Raw buffer in the current representation.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Returns the field in spectral representation.
    pub fn to_spectral(&self) -> SpectralField {
        match self.repr {
            Representation::Spectral => self.clone(),
            Representation::Physical => {
                let mut values = self.values.clone();
                fft::transform_2d(&mut values, self.grid.n1(), self.grid.n2(), true);
                let scale = 1.0 / self.grid.len() as f64;
                for v in &mut values {
                    *v *= scale;
                }
                SpectralField { grid: self.grid.clone(), values, repr: Representation::Spectral }
            }
        }
    }

    /// Returns the field in physical representation.
    pub fn to_physical(&self) -> SpectralField {
        match self.repr {
            Representation::Physical => self.clone(),
            Representation::Spectral => {
                let mut values = self.values.clone();
                fft::transform_2d(&mut values, self.grid.n1(), self.grid.n2(), false);
                SpectralField { grid: self.grid.clone(), values, repr: Representation::Physical }
            }
        }
    }

    /// Complex conjugate of the field.
    pub fn conj(&self) -> SpectralField {
        let phys = self.to_physical();
        let values = phys.values.iter().map(|v| v.conj()).collect();
        SpectralField { grid: self.grid.clone(), values, repr: Representation::Physical }
    }

    /// `L²` norm with the torus measure.
    pub fn l2_norm(&self) -> f64 {
        match self.repr {
            Representation::Physical => {
                let sum: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
                (self.grid.cell_area() * sum).sqrt()
            }
            Representation::Spectral => {
                let sum: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
                (self.grid.l1() * self.grid.l2() * sum).sqrt()
            }
        }
    }

    /// Sobolev norm `‖⟨D⟩^s u‖ = √(l1·l2 Σ_k ⟨ω_k⟩^{2s} |c_k|²)`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let spec = self.to_spectral();
        let mut sum = 0.0;
        for (idx, c) in spec.values.iter().enumerate() {
            let [w1, w2] = spec.grid.frequency(idx);
            let bracket_sq = 1.0 + w1 * w1 + w2 * w2;
            sum += bracket_sq.powf(s) * c.norm_sqr();
        }
        (self.grid.l1() * self.grid.l2() * sum).sqrt()
    }

    /// Linear combination `self + a·other`; both fields must share a grid.
    pub fn add_scaled(&self, a: Complex64, other: &SpectralField) -> Result<SpectralField, GridError> {
        if self.grid != other.grid {
            return Err(GridError::GridMismatch(self.grid.shape(), other.grid.shape()));
        }
        let lhs = self.to_spectral();
        let rhs = other.to_spectral();
        let values = lhs
            .values
            .iter()
            .zip(&rhs.values)
            .map(|(x, y)| x + a * y)
            .collect();
        Ok(SpectralField { grid: self.grid.clone(), values, repr: Representation::Spectral })
    }

    /// Pointwise scaling by a complex constant.
    pub fn scale(&self, a: Complex64) -> SpectralField {
        let values = self.values.iter().map(|v| a * v).collect();
        SpectralField { grid: self.grid.clone(), values, repr: self.repr }
    }

    /// `L²` inner product `(u, v) = ∫ u v̄`.
    pub fn inner(&self, other: &SpectralField) -> Result<Complex64, GridError> {
        if self.grid != other.grid {
            return Err(GridError::GridMismatch(self.grid.shape(), other.grid.shape()));
        }
        let a = self.to_physical();
        let b = other.to_physical();
        let sum: Complex64 = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| x * y.conj())
            .sum();
        Ok(sum * self.grid.cell_area())
    }

    /// Maximum pointwise modulus of the physical samples.
    pub fn max_abs(&self) -> f64 {
        self.to_physical()
            .values
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }
}

enum MultiplierKind {
    Closure(Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>),
    Sampled { grid: Grid2D, values: Vec<Complex64> },
}

/// A Fourier multiplier `m(ξ)` evaluated on the dual frequencies.
///
/// Multipliers are either closures (grid-free) or sampled tables bound to a
/// grid. An optional zero-mode override handles symbols singular at `ξ = 0`,
/// and odd symbols zero the unpaired Nyquist modes.
pub struct Multiplier {
    kind: MultiplierKind,
    zero_mode: Option<Complex64>,
    zero_nyquist: bool,
}

impl Multiplier {
    /// Multiplier from a closure over `(ξ1, ξ2)`.
    pub fn new(f: impl Fn(f64, f64) -> Complex64 + Send + Sync + 'static) -> Self {
        Self { kind: MultiplierKind::Closure(Arc::new(f)), zero_mode: None, zero_nyquist: false }
    }

    /// Multiplier from samples in storage order, bound to `grid`.
    pub fn from_samples(grid: Grid2D, values: Vec<Complex64>) -> Self {
        assert_eq!(values.len(), grid.len(), "multiplier table does not match grid");
        Self {
            kind: MultiplierKind::Sampled { grid, values },
            zero_mode: None,
            zero_nyquist: false,
        }
    }

    /// Overrides the value at `ξ = 0`; required for symbols singular there.
    pub fn with_zero_mode(mut self, value: Complex64) -> Self {
        self.zero_mode = Some(value);
        self
    }

    /// Zeroes all modes with a Nyquist component, for odd symbols whose
    /// unpaired mode has no well-defined image.
    pub fn with_nyquist_zeroed(mut self) -> Self {
        self.zero_nyquist = true;
        self
    }

    /// Spectral derivative `∂_axis`, i.e. `m(ξ) = iξ_axis` (odd, Nyquist-zeroed).
    pub fn derivative(axis: usize) -> Self {
        assert!(axis == 1 || axis == 2, "axis must be 1 or 2");
        Multiplier::new(move |w1, w2| {
            let w = if axis == 1 { w1 } else { w2 };
            Complex64::new(0.0, w)
        })
        .with_nyquist_zeroed()
    }

    /// Bessel potential `⟨ξ⟩^s = (1+|ξ|²)^{s/2}`.
    pub fn bessel_potential(s: f64) -> Self {
        Multiplier::new(move |w1, w2| {
            Complex64::new((1.0 + w1 * w1 + w2 * w2).powf(s / 2.0), 0.0)
        })
    }

    /// Half Laplacian `(-Δ)^{1/2}`, i.e. `m(ξ) = |ξ|`.
    pub fn half_laplacian() -> Self {
        Multiplier::new(|w1, w2| Complex64::new((w1 * w1 + w2 * w2).sqrt(), 0.0))
    }

    fn value_at(&self, idx: usize, grid: &Grid2D) -> Result<Complex64, GridError> {
        let i1 = idx % grid.n1();
        let i2 = idx / grid.n1();
        if self.zero_mode.is_some() && i1 == 0 && i2 == 0 {
            return Ok(self.zero_mode.unwrap());
        }
        if self.zero_nyquist && (i1 == grid.n1() / 2 || i2 == grid.n2() / 2) {
            return Ok(Complex64::default());
        }
        match &self.kind {
            MultiplierKind::Closure(f) => {
                let [w1, w2] = grid.frequency(idx);
                Ok(f(w1, w2))
            }
            MultiplierKind::Sampled { grid: bound, values } => {
                if bound != grid {
                    return Err(GridError::GridMismatch(bound.shape(), grid.shape()));
                }
                Ok(values[idx])
            }
        }
    }
}

/// Applies a Fourier multiplier: output coefficients are `c_k · m(ω_k)`.
///
/// Exact on band-limited fields; fails only when a sampled multiplier is
/// bound to a different grid.
pub fn apply_multiplier(u: &SpectralField, m: &Multiplier) -> Result<SpectralField, GridError> {
    let spec = u.to_spectral();
    let grid = spec.grid().clone();
    let mut values = Vec::with_capacity(grid.len());
    for (idx, c) in spec.values().iter().enumerate() {
        values.push(c * m.value_at(idx, &grid)?);
    }
    Ok(SpectralField::from_spectral(grid, values))
}

/// Zero-pads a coefficient buffer onto the doubled grid.
pub(crate) fn pad_spectrum(spec: &SpectralField) -> SpectralField {
    let grid = spec.grid();
    let big = grid.doubled();
    let mut values = vec![Complex64::default(); big.len()];
    let coeffs = spec.to_spectral();
    for (idx, &c) in coeffs.values().iter().enumerate() {
        let i1 = idx % grid.n1();
        let i2 = idx / grid.n1();
        let k1 = if i1 < grid.n1() / 2 { i1 as i64 } else { i1 as i64 - grid.n1() as i64 };
        let k2 = if i2 < grid.n2() / 2 { i2 as i64 } else { i2 as i64 - grid.n2() as i64 };
        let j1 = k1.rem_euclid(big.n1() as i64) as usize;
        let j2 = k2.rem_euclid(big.n2() as i64) as usize;
        values[j2 * big.n1() + j1] = c;
    }
    SpectralField::from_spectral(big, values)
}

/// Truncates a doubled-grid field back to the retained window of `target`.
pub(crate) fn truncate_spectrum(spec: &SpectralField, target: &Grid2D) -> SpectralField {
    let big = spec.grid();
    assert_eq!(big.n1(), 2 * target.n1());
    assert_eq!(big.n2(), 2 * target.n2());
    let coeffs = spec.to_spectral();
    let mut values = vec![Complex64::default(); target.len()];
    for i1 in 0..target.n1() {
        for i2 in 0..target.n2() {
            let k1 = if i1 < target.n1() / 2 { i1 as i64 } else { i1 as i64 - target.n1() as i64 };
            let k2 = if i2 < target.n2() / 2 { i2 as i64 } else { i2 as i64 - target.n2() as i64 };
            let j1 = k1.rem_euclid(big.n1() as i64) as usize;
            let j2 = k2.rem_euclid(big.n2() as i64) as usize;
            values[target.index(i1, i2)] = coeffs.values()[j2 * big.n1() + j1];
        }
    }
    SpectralField::from_spectral(target.clone(), values)
}

/// Pointwise product of 2 or 3 factors, dealiased by zero padding.
///
/// The product is evaluated on a grid of double resolution per axis and
/// truncated back, which is exact for cubic interactions of band-limited
/// fields: every aliased contribution on the doubled grid lands outside the
/// retained window.
pub fn dealiased_product(factors: &[&SpectralField]) -> Result<SpectralField, GridError> {
    if factors.len() < 2 || factors.len() > 3 {
        return Err(GridError::BadFactorCount(factors.len()));
    }
    let grid = factors[0].grid().clone();
    for f in &factors[1..] {
        if *f.grid() != grid {
            return Err(GridError::GridMismatch(grid.shape(), f.grid().shape()));
        }
    }
    let mut product = pad_spectrum(factors[0]).to_physical().values().to_vec();
    let big = grid.doubled();
    for f in &factors[1..] {
        let phys = pad_spectrum(f).to_physical();
        for (p, v) in product.iter_mut().zip(phys.values()) {
            *p *= v;
        }
    }
    let padded = SpectralField::from_physical(big, product);
    Ok(truncate_spectrum(&padded, &grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const TAU: f64 = 2.0 * std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_physical(grid: &Grid2D, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.len())
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        SpectralField::from_physical(grid.clone(), values)
    }

    #[test]
    fn make_grid_dual_lattice() {
        let g = Grid2D::new(8, 8, TAU, TAU).unwrap();
        let mut freqs: Vec<i64> = g.omega1().iter().map(|w| w.round() as i64).collect();
        freqs.sort_unstable();
        assert_eq!(freqs, vec![-4, -3, -2, -1, 0, 1, 2, 3]);
    }

    #[test]
    fn make_grid_half_integer_frequencies() {
        let g = Grid2D::new(16, 8, 2.0 * TAU, TAU).unwrap();
        let mut freqs: Vec<f64> = g.omega1().to_vec();
        freqs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (i, w) in freqs.iter().enumerate() {
            assert_relative_eq!(*w, -4.0 + 0.5 * i as f64, max_relative = 1e-14);
        }
    }

    #[test]
    fn make_grid_rejects_bad_input() {
        assert!(matches!(Grid2D::new(7, 8, TAU, TAU), Err(GridError::OddSize(..))));
        assert!(matches!(Grid2D::new(8, 4, TAU, TAU), Err(GridError::TooSmall(..))));
        assert!(matches!(Grid2D::new(8, 8, 0.0, TAU), Err(GridError::NonPositiveLength(..))));
        assert!(matches!(Grid2D::new(8, 8, TAU, -1.0), Err(GridError::NonPositiveLength(..))));
    }

    #[test]
    fn identity_multiplier_is_identity() {
        let g = Grid2D::square(16).unwrap();
        let u = random_physical(&g, 1);
        let m = Multiplier::new(|_, _| c(1.0, 0.0));
        let v = apply_multiplier(&u, &m).unwrap().to_physical();
        for (a, b) in u.values().iter().zip(v.values()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn spectral_derivative_of_sine() {
        let g = Grid2D::square(16).unwrap();
        let u = SpectralField::from_fn(g.clone(), |x1, _| c(x1.sin(), 0.0));
        let du = apply_multiplier(&u, &Multiplier::derivative(1)).unwrap().to_physical();
        let expect = SpectralField::from_fn(g, |x1, _| c(x1.cos(), 0.0));
        for (a, b) in du.values().iter().zip(expect.values()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn bessel_multiplier_on_plane_wave() {
        // ⟨(1,2)⟩² = 1 + 1 + 4 = 6.
        let g = Grid2D::square(16).unwrap();
        let u = SpectralField::from_modes(g.clone(), &[(1, 2, c(1.0, 0.0))]);
        let v = apply_multiplier(&u, &Multiplier::bessel_potential(2.0)).unwrap();
        let idx = g.mode_index(1, 2).unwrap();
        assert_relative_eq!(v.values()[idx].re, 6.0, max_relative = 1e-13);
        let leak: f64 = v
            .values()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != idx)
            .map(|(_, z)| z.norm())
            .sum();
        assert!(leak < 1e-12);
    }

    #[test]
    fn sampled_multiplier_grid_mismatch() {
        let g = Grid2D::square(16).unwrap();
        let h = Grid2D::square(32).unwrap();
        let m = Multiplier::from_samples(h.clone(), vec![c(1.0, 0.0); h.len()]);
        let u = SpectralField::zero(g);
        assert!(matches!(apply_multiplier(&u, &m), Err(GridError::GridMismatch(..))));
    }

    #[test]
    fn sobolev_norm_single_mode() {
        let g = Grid2D::square(16).unwrap();
        let amp = 0.7;
        let u = SpectralField::from_modes(g, &[(1, 0, c(amp, 0.0))]);
        assert_relative_eq!(u.sobolev_norm(0.0), TAU * amp, max_relative = 1e-13);
        assert_relative_eq!(u.sobolev_norm(1.0), TAU * amp * 2f64.sqrt(), max_relative = 1e-13);
        let z = SpectralField::zero(Grid2D::square(8).unwrap());
        assert_eq!(z.sobolev_norm(2.5), 0.0);
    }

    #[test]
    fn dealiased_product_cancelling_modes() {
        let g = Grid2D::square(16).unwrap();
        let a = SpectralField::from_modes(g.clone(), &[(1, 0, c(1.0, 0.0))]);
        let b = SpectralField::from_modes(g.clone(), &[(-1, 0, c(1.0, 0.0))]);
        let p = dealiased_product(&[&a, &b]).unwrap();
        let idx0 = g.mode_index(0, 0).unwrap();
        assert_relative_eq!(p.values()[idx0].re, 1.0, max_relative = 1e-13);
        let leak: f64 = p
            .values()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != idx0)
            .map(|(_, z)| z.norm())
            .sum();
        assert!(leak < 1e-12);
    }

    #[test]
    fn dealiased_cube_exact_mode_bookkeeping() {
        let g = Grid2D::square(16).unwrap();
        let e1 = SpectralField::from_modes(g.clone(), &[(1, 0, c(1.0, 0.0))]);
        let p = dealiased_product(&[&e1, &e1, &e1]).unwrap();
        let idx3 = g.mode_index(3, 0).unwrap();
        assert_relative_eq!(p.values()[idx3].re, 1.0, max_relative = 1e-13);
        for (i, z) in p.values().iter().enumerate() {
            if i != idx3 {
                assert!(z.norm() < 1e-13, "aliased energy at mode index {i}");
            }
        }

        // A cube whose true frequency leaves the window is annihilated, not
        // wrapped: (e^{i6x})³ = e^{i18x} and 18 is not retained on n=16.
        let e6 = SpectralField::from_modes(g.clone(), &[(6, 0, c(1.0, 0.0))]);
        let q = dealiased_product(&[&e6, &e6, &e6]).unwrap();
        assert!(q.values().iter().map(|z| z.norm()).sum::<f64>() < 1e-12);
    }

    #[test]
    fn dealiased_product_zero_factor() {
        let g = Grid2D::square(16).unwrap();
        let u = random_physical(&g, 2);
        let z = SpectralField::zero(g);
        let p = dealiased_product(&[&u, &z]).unwrap();
        assert!(p.values().iter().map(|v| v.norm()).sum::<f64>() < 1e-14);
    }

    #[test]
    fn dealiased_product_rejects_bad_arity() {
        let g = Grid2D::square(16).unwrap();
        let u = random_physical(&g, 3);
        assert!(matches!(dealiased_product(&[&u]), Err(GridError::BadFactorCount(1))));
        assert!(matches!(
            dealiased_product(&[&u, &u, &u, &u]),
            Err(GridError::BadFactorCount(4))
        ));
    }

    #[test]
    fn dealiased_matches_naive_when_bandwidth_fits() {
        let g = Grid2D::square(24).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        // Factors confined to |k|∞ ≤ 3 keep the cubic bandwidth inside n=24.
        let mut modes = |count: usize| {
            let mut list = Vec::new();
            for _ in 0..count {
                list.push((
                    rng.gen_range(-3..=3),
                    rng.gen_range(-3..=3),
                    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                ));
            }
            list
        };
        let a = SpectralField::from_modes(g.clone(), &modes(5));
        let b = SpectralField::from_modes(g.clone(), &modes(5));
        let d = SpectralField::from_modes(g.clone(), &modes(5));
        let dealiased = dealiased_product(&[&a, &b, &d]).unwrap().to_physical();
        let naive: Vec<Complex64> = a
            .to_physical()
            .values()
            .iter()
            .zip(b.to_physical().values())
            .zip(d.to_physical().values())
            .map(|((x, y), z)| x * y * z)
            .collect();
        for (p, q) in dealiased.values().iter().zip(&naive) {
            assert!((p - q).norm() < 1e-12);
        }
    }

    #[test]
    fn multiplier_inverse_round_trip() {
        let g = Grid2D::square(16).unwrap();
        let u = random_physical(&g, 11);
        let m = Multiplier::new(|w1, w2| c(2.0 + (w1 * 0.3).cos(), 0.4 * (w2 * 0.2).sin()));
        let inv = Multiplier::new(|w1, w2| {
            let v = c(2.0 + (w1 * 0.3).cos(), 0.4 * (w2 * 0.2).sin());
            v.inv()
        });
        let back = apply_multiplier(&apply_multiplier(&u, &m).unwrap(), &inv)
            .unwrap()
            .to_physical();
        for (a, b) in u.values().iter().zip(back.values()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn round_trip_and_parseval(
            seed in 0u64..1000,
            n1 in prop::sample::select(vec![8usize, 12, 16, 24]),
            n2 in prop::sample::select(vec![8usize, 16, 20]),
        ) {
            let g = Grid2D::new(n1, n2, TAU, 1.5 * TAU).unwrap();
            let u = random_physical(&g, seed);
            let back = u.to_spectral().to_physical();
            let num: f64 = u
                .values()
                .iter()
                .zip(back.values())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let den: f64 = u.values().iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            prop_assert!(num <= 1e-12 * den);

            let phys_sq: f64 = u.values().iter().map(|v| v.norm_sqr()).sum::<f64>()
                * g.cell_area();
            let spec = u.to_spectral();
            let spec_sq: f64 = spec.values().iter().map(|v| v.norm_sqr()).sum::<f64>()
                * g.l1() * g.l2();
            prop_assert!((phys_sq - spec_sq).abs() <= 1e-12 * phys_sq.max(1e-300));
        }
    }
}
