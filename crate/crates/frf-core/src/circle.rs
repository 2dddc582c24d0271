//! Uniform periodic grid on the circle `S^1 = R/Z` with spectral calculus.
//!
//! All functions are sampled at the nodes `x_j = j/n` and treated as smooth
//! 1-periodic functions. Differentiation, quadrature and the inverse of
//! `A = -d^2/dx^2` are computed in Fourier space, so they are exact on
//! trigonometric polynomials resolved by the grid. The Nyquist mode of a
//! derivative is set to zero (the standard convention for even `n`).

use std::cell::RefCell;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Fields entering `inverse_a` must have |mean| below this.
pub const MEAN_ZERO_TOL: f64 = 1e-12;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_forward(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_forward(values.len());
        fft.process(&mut buf);
    });
    buf
}

fn fft_inverse_real(mut spectrum: Vec<Complex64>) -> Vec<f64> {
    let n = spectrum.len();
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_inverse(n);
        fft.process(&mut spectrum);
    });
    let scale = 1.0 / n as f64;
    spectrum.iter().map(|c| c.re * scale).collect()
}

/// Signed wavenumber of FFT bin `j` on an `n`-point grid (Nyquist positive).
#[inline]
pub fn wavenumber(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Uniform grid of `n` nodes `x_j = j/n` on `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodicGrid {
    n: usize,
}

impl PeriodicGrid {
    /// Default grid resolution used by solvers and the CLI.
    pub const DEFAULT_N: usize = 256;

    pub fn new(n: usize) -> Result<Self> {
        if n < 16 || n % 2 != 0 {
            return Err(Error::InvalidGrid(n));
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node `x_j = j/n`, exact by construction.
    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        j as f64 / self.n as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|j| self.node(j))
    }
}

/// Real scalar function sampled on a [`PeriodicGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField {
    grid: PeriodicGrid,
    values: Vec<f64>,
}

impl PeriodicField {
    pub fn new(grid: PeriodicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(grid.len(), values.len()));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: PeriodicGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: PeriodicGrid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Sample a closure at the grid nodes.
    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid,
            values: grid.nodes().map(f).collect(),
        }
    }

    #[inline]
    pub fn grid(&self) -> PeriodicGrid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(self.grid.len(), other.grid.len()));
        }
        Ok(())
    }

    /// Quadrature of `f` over the circle: `(1/n) sum f(x_j)`.
    ///
    /// Exact for trigonometric polynomials of degree below `n`.
    pub fn integrate(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.grid.len() as f64
    }

    /// Alias for [`integrate`](Self::integrate); the volume form has unit mass.
    #[inline]
    pub fn mean(&self) -> f64 {
        self.integrate()
    }

    /// Subtract the mean in place.
    pub fn project_mean_zero(&mut self) {
        let m = self.mean();
        for v in &mut self.values {
            *v -= m;
        }
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// `self + c * other`, the workhorse of the RK4 stages.
    pub fn axpy(&self, c: f64, other: &Self) -> Self {
        self.zip(other, |a, b| a + c * b)
    }

    /// Spectral derivative; exact on resolved trigonometric polynomials.
    pub fn derivative(&self) -> Result<Self> {
        if !self.is_finite() {
            return Err(Error::NonFinite);
        }
        let n = self.grid.len();
        let mut spec = fft_forward(&self.values);
        for (j, c) in spec.iter_mut().enumerate() {
            if j == n / 2 {
                *c = Complex64::new(0.0, 0.0);
            } else {
                let k = wavenumber(j, n) as f64;
                *c *= Complex64::new(0.0, TAU * k);
            }
        }
        Ok(Self {
            grid: self.grid,
            values: fft_inverse_real(spec),
        })
    }

    /// Zero all modes with `|k| > n/3` (2/3-rule dealiasing).
    pub fn dealias(&self) -> Self {
        let n = self.grid.len();
        let cut = n as i64 / 3;
        let mut spec = fft_forward(&self.values);
        for (j, c) in spec.iter_mut().enumerate() {
            if wavenumber(j, n).abs() > cut {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        Self {
            grid: self.grid,
            values: fft_inverse_real(spec),
        }
    }

    /// Pointwise product followed by 2/3-rule truncation.
    pub fn mul_dealiased(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a * b).dealias()
    }

    /// Band-limited interpolant for off-grid evaluation.
    pub fn interpolant(&self) -> SpectralInterpolant {
        SpectralInterpolant::new(self)
    }
}

/// `A^{-1} u` for `A = -d^2/dx^2`, on mean-zero input.
///
/// Fourier modes `k != 0` are divided by `(2 pi k)^2`, the zero mode is
/// dropped, and the result is shifted to vanish at `x = 0`. This matches the
/// double-integral form of the inverse on mean-zero input; the mean-zero
/// restriction is what keeps the first derivative of the output periodic.
pub fn inverse_a(u: &PeriodicField) -> Result<PeriodicField> {
    if !u.is_finite() {
        return Err(Error::NonFinite);
    }
    let m = u.mean();
    if m.abs() > MEAN_ZERO_TOL {
        return Err(Error::NotMeanZero(m));
    }
    let n = u.grid.len();
    let mut spec = fft_forward(&u.values);
    spec[0] = Complex64::new(0.0, 0.0);
    for (j, c) in spec.iter_mut().enumerate().skip(1) {
        let k = wavenumber(j, n) as f64;
        *c /= (TAU * k) * (TAU * k);
    }
    let mut values = fft_inverse_real(spec);
    let at_zero = values[0];
    for v in &mut values {
        *v -= at_zero;
    }
    Ok(PeriodicField {
        grid: u.grid,
        values,
    })
}

/// Spectral antiderivative: `F(x) = integral_0^x f`, including the secular
/// `mean(f) * x` part, so `F` itself is generally not periodic.
///
/// Returned as plain samples at the grid nodes with `F(0) = 0`.
pub fn cumulative_integral(f: &PeriodicField) -> Vec<f64> {
    let n = f.grid.len();
    let m = f.mean();
    let mut spec = fft_forward(&f.values);
    spec[0] = Complex64::new(0.0, 0.0);
    // Nyquist: cos(pi n x) integrates to sin(pi n x)/(pi n), zero at nodes.
    spec[n / 2] = Complex64::new(0.0, 0.0);
    for (j, c) in spec.iter_mut().enumerate() {
        let k = wavenumber(j, n) as f64;
        if k != 0.0 {
            *c /= Complex64::new(0.0, TAU * k);
        }
    }
    let g = fft_inverse_real(spec);
    let g0 = g[0];
    (0..n)
        .map(|j| m * f.grid.node(j) + g[j] - g0)
        .collect()
}

/// Precomputed Fourier coefficients for band-limited point evaluation.
pub struct SpectralInterpolant {
    n: usize,
    // Unnormalized forward-FFT coefficients, bins 0..=n/2.
    coeffs: Vec<Complex64>,
}

impl SpectralInterpolant {
    fn new(field: &PeriodicField) -> Self {
        let n = field.grid.len();
        let spec = fft_forward(&field.values);
        Self {
            n,
            coeffs: spec[..=n / 2].to_vec(),
        }
    }

    /// Evaluate the trigonometric interpolant at an arbitrary point.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.n;
        let half = n / 2;
        let rot = Complex64::from_polar(1.0, TAU * x);
        let mut z = rot;
        let mut acc = 0.5 * self.coeffs[0].re;
        for j in 1..half {
            acc += (self.coeffs[j] * z).re;
            z *= rot;
        }
        // Nyquist mode interpolates as cos(pi n x); its FFT bin is real.
        acc += 0.5 * self.coeffs[half].re * (std::f64::consts::PI * n as f64 * x).cos();
        2.0 * acc / n as f64
    }
}

/// Periodic cubic (Catmull-Rom) interpolation; cheaper, O(h^4) accurate.
pub fn eval_cubic(field: &PeriodicField, x: f64) -> f64 {
    let n = field.grid.len();
    let v = field.values();
    let xf = (x.rem_euclid(1.0)) * n as f64;
    let i = xf.floor() as usize % n;
    let t = xf - xf.floor();
    let p0 = v[(i + n - 1) % n];
    let p1 = v[i];
    let p2 = v[(i + 1) % n];
    let p3 = v[(i + 2) % n];
    0.5 * ((2.0 * p1)
        + (-p0 + p2) * t
        + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t * t
        + (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t * t * t)
}
