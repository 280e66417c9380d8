//! Uniform square grids, complex fields sampled on them, discrete norms and
//! Fourier multipliers.
//!
//! A [`Grid2D`] with `N` points per axis covers `[-L, L)^2` with spacing
//! `h = 2L/N`. Node `(m, n)` sits at `(-L + m h, -L + n h)`, identified with the
//! complex number `z = z1 + i z2`, and is stored at flat index `n * N + m`
//! (first coordinate fastest).
//!
//! The continuous Fourier transform is normalized as
//! `F^(xi) = (1/2pi) \int F(x) e^{-i xi.x} dx`; its discrete counterpart lives on
//! the dual lattice `xi = (pi/L) (j1, j2)` with `j` in `-N/2 .. N/2 - 1`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{signed_index, Fft2};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Uniform square grid on `[-L, L)^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2D {
    n: usize,
    half_width: f64,
}

impl Grid2D {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("grid size must be a power of two >= 2, got {n}")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid half-width must be positive and finite, got {half_width}"
            )));
        }
        Ok(Self { n, half_width })
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Quadrature weight `h^2` of the midpoint rule.
    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    /// Number of nodes, `N^2`.
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node `(m, n)` as a complex number.
    #[inline]
    pub fn node(&self, m: usize, n: usize) -> Complex64 {
        let h = self.spacing();
        Complex64::new(-self.half_width + m as f64 * h, -self.half_width + n as f64 * h)
    }

    #[inline]
    pub fn node_at(&self, index: usize) -> Complex64 {
        self.node(index % self.n, index / self.n)
    }

    /// Nodes in storage order.
    pub fn nodes(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.len()).map(move |i| self.node_at(i))
    }

    pub fn spectral(&self) -> SpectralGrid {
        SpectralGrid { grid: *self }
    }

    /// The grid carrying the dual frequency lattice, `(N, pi N / (2L))`.
    pub fn dual(&self) -> Grid2D {
        Grid2D { n: self.n, half_width: PI * self.n as f64 / (2.0 * self.half_width) }
    }

    /// Flat indices of the outermost ring of nodes.
    pub fn boundary_indices(&self) -> impl Iterator<Item = usize> + '_ {
        let n = self.n;
        (0..self.len()).filter(move |&i| {
            let (m, k) = (i % n, i / n);
            m == 0 || k == 0 || m == n - 1 || k == n - 1
        })
    }

    pub(crate) fn check_same(&self, other: &Grid2D) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "(N={}, L={}) vs (N={}, L={})",
                self.n, self.half_width, other.n, other.half_width
            )))
        }
    }
}

/// Frequency lattice `xi = (pi/L) (j1, j2)` dual to a [`Grid2D`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralGrid {
    grid: Grid2D,
}

impl SpectralGrid {
    pub fn step(&self) -> f64 {
        PI / self.grid.half_width
    }

    /// Frequency of FFT bin `a` along one axis.
    #[inline]
    pub fn frequency(&self, a: usize) -> f64 {
        signed_index(a, self.grid.n) as f64 * self.step()
    }

    /// `zeta = xi1 + i xi2` for FFT bins `(a, b)` (first, second coordinate).
    #[inline]
    pub fn zeta(&self, a: usize, b: usize) -> Complex64 {
        Complex64::new(self.frequency(a), self.frequency(b))
    }

    pub fn nyquist(&self) -> f64 {
        self.step() * (self.grid.n / 2) as f64
    }
}

/// Complex samples on a [`Grid2D`], row-major with the second coordinate slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    grid: Grid2D,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: Grid2D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidField(format!("expected {} values, got {}", grid.len(), values.len())));
        }
        let field = Self { grid, values };
        field.validate()?;
        Ok(field)
    }

    /// Internal constructor for values produced by trusted arithmetic.
    pub(crate) fn from_parts(grid: Grid2D, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self::constant(grid, ZERO)
    }

    pub fn constant(grid: Grid2D, value: Complex64) -> Self {
        Self { grid, values: vec![value; grid.len()] }
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: Grid2D, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self { grid, values: grid.nodes().map(f).collect() }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Errors if any sample is NaN or infinite.
    pub fn validate(&self) -> Result<()> {
        match self.values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            None => Ok(()),
            Some(i) => Err(Error::InvalidField(format!("non-finite value at index {i}"))),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == ZERO)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::from_parts(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise map with access to the node position.
    pub fn map_with_node(&self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let values = self.values.iter().enumerate().map(|(i, &v)| f(self.grid.node_at(i), v)).collect();
        Self::from_parts(self.grid, values)
    }

    pub fn zip_with(&self, other: &ComplexField, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self::from_parts(self.grid, values))
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn add(&self, other: &ComplexField) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ComplexField) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &ComplexField) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Discrete mean `N^-2 sum F`.
    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Midpoint-rule integral `h^2 sum F`.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.grid.cell_area()
    }
}

/// Sobolev index `s` in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct SobolevIndex(f64);

impl SobolevIndex {
    pub fn new(s: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&s) {
            Ok(Self(s))
        } else {
            Err(Error::InvalidArgument(format!("Sobolev index must lie in [0, 1], got {s}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Sign of a modulation `e_{+-k}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Discrete `L^p` norm `(h^2 sum |F|^p)^{1/p}`; `p = f64::INFINITY` gives `max |F|`.
pub fn lp_norm(field: &ComplexField, p: f64) -> Result<f64> {
    field.validate()?;
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidArgument(format!("L^p exponent must be >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(field.max_abs());
    }
    let area = field.grid.cell_area();
    let sum: f64 = if p == 2.0 {
        field.values.iter().map(|v| v.norm_sqr()).sum()
    } else {
        field.values.iter().map(|v| v.norm().powf(p)).sum()
    };
    Ok((area * sum).powf(1.0 / p))
}

pub fn l2_norm(field: &ComplexField) -> f64 {
    (field.grid.cell_area() * field.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
}

/// Applies the periodic Fourier multiplier `symbol(zeta)` on the dual lattice.
pub fn apply_multiplier(field: &ComplexField, symbol: impl Fn(Complex64) -> Complex64) -> ComplexField {
    let grid = field.grid;
    let n = grid.n();
    let spectral = grid.spectral();
    let fft = Fft2::shared(n);
    let mut data = field.values.clone();
    fft.forward(&mut data);
    let scale = 1.0 / (n * n) as f64;
    for b in 0..n {
        for a in 0..n {
            data[b * n + a] *= symbol(spectral.zeta(a, b)) * scale;
        }
    }
    fft.inverse(&mut data);
    ComplexField::from_parts(grid, data)
}

/// `D^s F`, the multiplier `|xi|^s`. At `xi = 0` the symbol is 1 for `s = 0`
/// and 0 otherwise, so `D^0` is exactly the identity.
pub fn fractional_derivative(field: &ComplexField, s: SobolevIndex) -> Result<ComplexField> {
    field.validate()?;
    let s = s.value();
    if s == 0.0 {
        return Ok(field.clone());
    }
    Ok(apply_multiplier(field, |zeta| {
        let r = zeta.norm();
        if r == 0.0 {
            ZERO
        } else {
            Complex64::new(r.powf(s), 0.0)
        }
    }))
}

/// Weighted Sobolev norm `max(||F||_2, ||D^s F||_2, || |z|^s F ||_2)`.
pub fn hss_norm(field: &ComplexField, s: SobolevIndex) -> Result<f64> {
    field.validate()?;
    let plain = l2_norm(field);
    let derivative = l2_norm(&fractional_derivative(field, s)?);
    let sv = s.value();
    let weighted = l2_norm(&field.map_with_node(|z, v| if sv == 0.0 { v } else { v * z.norm().powf(sv) }));
    Ok(plain.max(derivative).max(weighted))
}

/// `e_k(z) = exp(i (k1 z1 + k2 z2))`.
#[inline]
pub fn character(k: Complex64, z: Complex64) -> Complex64 {
    Complex64::from_polar(1.0, k.re * z.re + k.im * z.im)
}

/// Pointwise product with `e_{sign k}`.
pub fn modulate(field: &ComplexField, k: Complex64, sign: Sign) -> ComplexField {
    if k == ZERO {
        return field.clone();
    }
    let k = k * sign.as_f64();
    field.map_with_node(|z, v| v * character(k, z))
}

/// Spectral `d/dz-bar`, symbol `i zeta / 2`.
pub fn dbar(field: &ComplexField) -> ComplexField {
    apply_multiplier(field, |zeta| Complex64::i() * zeta * 0.5)
}

/// Spectral `d/dz`, symbol `i conj(zeta) / 2`.
pub fn dz(field: &ComplexField) -> ComplexField {
    apply_multiplier(field, |zeta| Complex64::i() * zeta.conj() * 0.5)
}

/// Fourier transform `(1/2pi) \int F e^{-i xi.x} dx` by the midpoint rule,
/// returned on the dual grid [`Grid2D::dual`] (node `(a, b)` at
/// `xi = (pi/L)(a - N/2, b - N/2)`).
pub fn fourier_transform(field: &ComplexField) -> ComplexField {
    let grid = field.grid;
    let n = grid.n();
    let fft = Fft2::shared(n);
    let mut data = field.values.clone();
    fft.forward(&mut data);
    let factor = grid.cell_area() / (2.0 * PI);
    let half = n / 2;
    let mut out = vec![ZERO; n * n];
    for b in 0..n {
        for a in 0..n {
            let j1 = a as i64 - half as i64;
            let j2 = b as i64 - half as i64;
            let bin = ((b + half) % n) * n + (a + half) % n;
            let sign = if (j1 + j2).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            out[b * n + a] = data[bin] * (sign * factor);
        }
    }
    ComplexField::from_parts(grid.dual(), out)
}
