//! The n-dimensional theory on the flat torus `T^n = R^n/Z^n`.
//!
//! The flat torus makes the musical isomorphisms trivial and diagonalizes
//! the Laplace-de Rham operator in Fourier space, so the alpha-connection
//!
//! ```text
//! nabla^(alpha)_v w = -{Delta^{-1} d(d div w . v + ((1 - alpha)/2) div w div v)}#
//! ```
//!
//! and the geodesic equation
//!
//! ```text
//! d phi_t + d iota_u d phi + (1 - alpha) phi d phi = 0,   phi = div u,
//! ```
//!
//! are implementable with per-axis FFTs alone. Sign convention:
//! `Delta_dR f = -sum_i d^2 f/dx_i^2` on functions, so
//! `div(-(Delta_dR^{-1} df)#) = f - int f dmu`.
//!
//! Lagrangian quantities of the `alpha = 1` integrable case (the Jacobian
//! density and `phi` in flow labels) are closed-form; Eulerian access to
//! them goes through particle tracking ([`advect_points`]) since n-dim
//! diffeomorphism inversion is deliberately out of scope.

use std::cell::RefCell;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::circle::wavenumber;
use crate::divergence::AlphaParam;
use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Uniform tensor grid on `T^n`: `m` samples per axis, row-major storage
/// with the last axis fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusGrid {
    dim: usize,
    m: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, m: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!(
                "torus dimension {dim} outside 1..=3"
            )));
        }
        if m < 16 || !m.is_power_of_two() {
            return Err(Error::InvalidGrid(m));
        }
        Ok(Self { dim, m })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Samples per axis.
    #[inline]
    pub fn samples(&self) -> usize {
        self.m
    }

    /// Total number of grid points `m^dim`.
    #[inline]
    pub fn len(&self) -> usize {
        self.m.pow(self.dim as u32)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Storage stride of `axis` (last axis is contiguous).
    #[inline]
    fn stride(&self, axis: usize) -> usize {
        self.m.pow((self.dim - 1 - axis) as u32)
    }

    /// Decode a flat index into per-axis sample indices.
    fn decode(&self, idx: usize, digits: &mut [usize]) {
        let mut rest = idx;
        for a in (0..self.dim).rev() {
            digits[a] = rest % self.m;
            rest /= self.m;
        }
    }
}

fn fft_all_axes(data: &mut [Complex64], grid: TorusGrid, forward: bool) {
    let m = grid.m;
    PLANNER.with(|p| {
        let fft = if forward {
            p.borrow_mut().plan_fft_forward(m)
        } else {
            p.borrow_mut().plan_fft_inverse(m)
        };
        let mut line = vec![Complex64::new(0.0, 0.0); m];
        for axis in 0..grid.dim {
            let stride = grid.stride(axis);
            let block = stride * m;
            for base in (0..data.len()).step_by(block) {
                for off in 0..stride {
                    for j in 0..m {
                        line[j] = data[base + off + j * stride];
                    }
                    fft.process(&mut line);
                    for j in 0..m {
                        data[base + off + j * stride] = line[j];
                    }
                }
            }
        }
    });
    if !forward {
        let scale = 1.0 / grid.len() as f64;
        for c in data.iter_mut() {
            *c *= scale;
        }
    }
}

/// Real scalar field sampled on a [`TorusGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct TorusField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl TorusField {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(grid.len(), values.len()));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Sample a closure at the grid nodes `x = (j_0/m, ..., j_{d-1}/m)`.
    pub fn from_fn(grid: TorusGrid, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut digits = vec![0usize; grid.dim];
        let mut point = vec![0.0f64; grid.dim];
        let values = (0..grid.len())
            .map(|idx| {
                grid.decode(idx, &mut digits);
                for (c, &j) in point.iter_mut().zip(&digits) {
                    *c = j as f64 / grid.m as f64;
                }
                f(&point)
            })
            .collect();
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> TorusGrid {
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

    /// Quadrature against the unit volume form: the plain mean of samples.
    pub fn integrate(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.grid.len() as f64
    }

    #[inline]
    pub fn mean(&self) -> f64 {
        self.integrate()
    }

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

    pub fn axpy(&self, c: f64, other: &Self) -> Self {
        self.zip(other, |a, b| a + c * b)
    }

    fn spectrum(&self) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = self
            .values
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        fft_all_axes(&mut buf, self.grid, true);
        buf
    }

    fn from_spectrum(grid: TorusGrid, mut spec: Vec<Complex64>) -> Self {
        fft_all_axes(&mut spec, grid, false);
        Self {
            grid,
            values: spec.iter().map(|c| c.re).collect(),
        }
    }

    /// Apply a Fourier multiplier `sigma(k)` (signed wavenumber vector).
    fn multiplier(&self, sigma: impl Fn(&[i64]) -> Complex64) -> Self {
        let grid = self.grid;
        let mut spec = self.spectrum();
        let mut digits = vec![0usize; grid.dim];
        let mut k = vec![0i64; grid.dim];
        for (idx, c) in spec.iter_mut().enumerate() {
            grid.decode(idx, &mut digits);
            for (kk, &j) in k.iter_mut().zip(&digits) {
                *kk = wavenumber(j, grid.m);
            }
            *c *= sigma(&k);
        }
        Self::from_spectrum(grid, spec)
    }

    /// Spectral `d/dx_axis`; the Nyquist mode along `axis` is zeroed.
    pub fn derivative(&self, axis: usize) -> Result<Self> {
        if !self.is_finite() {
            return Err(Error::NonFinite);
        }
        if axis >= self.grid.dim {
            return Err(Error::InvalidParameter(format!(
                "axis {axis} out of range for dimension {}",
                self.grid.dim
            )));
        }
        let nyquist = (self.grid.m / 2) as i64;
        Ok(self.multiplier(|k| {
            if k[axis] == nyquist {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, TAU * k[axis] as f64)
            }
        }))
    }

    /// Zero all modes with `|k_i| > m/3` along any axis (2/3 rule per axis).
    pub fn dealias(&self) -> Self {
        let cut = (self.grid.m / 3) as i64;
        self.multiplier(|k| {
            if k.iter().any(|kk| kk.abs() > cut) {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
    }

    /// Pointwise product followed by per-axis 2/3-rule truncation.
    pub fn mul_dealiased(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a * b).dealias()
    }

    pub fn gradient(&self) -> Result<TorusVectorField> {
        TorusVectorField::new(
            (0..self.grid.dim)
                .map(|a| self.derivative(a))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// `Delta_dR^{-1}` on the mean-zero part: nonzero modes divided by
    /// `(2 pi)^2 |k|^2`, zero mode dropped.
    pub fn inv_laplace_mean_zero(&self) -> Result<Self> {
        if !self.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(self.multiplier(|k| {
            let k2: f64 = k.iter().map(|&kk| (kk * kk) as f64).sum();
            if k2 == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0 / (TAU * TAU * k2), 0.0)
            }
        }))
    }

    /// `Delta_dR f = -sum_i d^2 f/dx_i^2` (geometer's sign).
    pub fn laplace_de_rham(&self) -> Result<Self> {
        if !self.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(self.multiplier(|k| {
            let k2: f64 = k.iter().map(|&kk| (kk * kk) as f64).sum();
            Complex64::new(TAU * TAU * k2, 0.0)
        }))
    }

    /// Band-limited interpolant for off-grid evaluation.
    pub fn interpolant(&self) -> TorusInterpolant {
        TorusInterpolant {
            grid: self.grid,
            coeffs: self.spectrum(),
        }
    }
}

/// Contravariant vector field on the torus; on the flat metric the
/// components coincide with the 1-form coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusVectorField {
    components: Vec<TorusField>,
}

impl TorusVectorField {
    pub fn new(components: Vec<TorusField>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty vector field".into()))?;
        let grid = first.grid();
        if components.len() != grid.dim() {
            return Err(Error::InvalidParameter(format!(
                "{} components for dimension {}",
                components.len(),
                grid.dim()
            )));
        }
        for c in &components {
            first.same_grid(c)?;
        }
        Ok(Self { components })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            components: (0..grid.dim()).map(|_| TorusField::zeros(grid)).collect(),
        }
    }

    #[inline]
    pub fn grid(&self) -> TorusGrid {
        self.components[0].grid()
    }

    #[inline]
    pub fn components(&self) -> &[TorusField] {
        &self.components
    }

    #[inline]
    pub fn component(&self, i: usize) -> &TorusField {
        &self.components[i]
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(TorusField::is_finite)
    }

    pub fn linf(&self) -> f64 {
        self.components.iter().fold(0.0, |a, c| a.max(c.linf()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            components: self.components.iter().map(|f| f.scaled(c)).collect(),
        }
    }

    pub fn axpy(&self, c: f64, other: &Self) -> Self {
        Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.axpy(c, b))
                .collect(),
        }
    }

    /// Spectral divergence `sum_i d u_i/dx_i`; mean-zero by periodicity.
    pub fn div(&self) -> Result<TorusField> {
        let mut acc = TorusField::zeros(self.grid());
        for (a, c) in self.components.iter().enumerate() {
            acc = acc.axpy(1.0, &c.derivative(a)?);
        }
        Ok(acc)
    }

    /// Dealiased pointwise inner product `sum_i u_i v_i`.
    pub fn dot_dealiased(&self, other: &Self) -> TorusField {
        let mut acc = TorusField::zeros(self.grid());
        for (a, b) in self.components.iter().zip(&other.components) {
            acc = acc.axpy(1.0, &a.zip(b, |p, q| p * q));
        }
        acc.dealias()
    }

    /// Largest antisymmetrized derivative pair `|d_i u_j - d_j u_i|`;
    /// zero exactly on gradient fields.
    pub fn curl_linf(&self) -> Result<f64> {
        let d = self.grid().dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in (i + 1)..d {
                let c = self.components[j]
                    .derivative(i)?
                    .axpy(-1.0, &self.components[i].derivative(j)?);
                worst = worst.max(c.linf());
            }
        }
        Ok(worst)
    }

    pub fn interpolant(&self) -> TorusVectorInterpolant {
        TorusVectorInterpolant {
            components: self.components.iter().map(TorusField::interpolant).collect(),
        }
    }
}

/// Positive unit-mass density on the torus (mean exactly 1).
#[derive(Debug, Clone, PartialEq)]
pub struct TorusDensity {
    field: TorusField,
}

impl TorusDensity {
    pub fn new(field: TorusField) -> Result<Self> {
        if !field.is_finite() {
            return Err(Error::InvalidDensity("non-finite values".into()));
        }
        let min = field.values().iter().cloned().fold(f64::INFINITY, f64::min);
        if min <= 0.0 {
            return Err(Error::InvalidDensity(format!("minimum {min:e} <= 0")));
        }
        let mass = field.integrate();
        Ok(Self {
            field: field.scaled(1.0 / mass),
        })
    }

    pub fn uniform(grid: TorusGrid) -> Self {
        Self {
            field: TorusField::constant(grid, 1.0),
        }
    }

    #[inline]
    pub fn as_field(&self) -> &TorusField {
        &self.field
    }

    pub fn into_field(self) -> TorusField {
        self.field
    }
}

/// `(1/4) int div v . div w dmu`; degenerate on divergence-free fields.
pub fn h1_inner_nd(v: &TorusVectorField, w: &TorusVectorField) -> Result<f64> {
    let dv = v.div()?;
    let dw = w.div()?;
    Ok(0.25 * dv.zip(&dw, |a, b| a * b).integrate())
}

/// The alpha-connection Christoffel map at the identity coset:
/// `-{Delta^{-1} d(d div w . v + ((1 - alpha)/2) div w div v)}#`,
/// which on the flat torus is `-grad(Delta_dR^{-1}(f - mean f))`.
pub fn nabla_alpha_identity(
    v: &TorusVectorField,
    w: &TorusVectorField,
    alpha: AlphaParam,
) -> Result<TorusVectorField> {
    let div_w = w.div()?;
    let div_v = v.div()?;
    let f = div_w
        .gradient()?
        .dot_dealiased(v)
        .axpy((1.0 - alpha.value()) / 2.0, &div_w.mul_dealiased(&div_v));
    Ok(f.inv_laplace_mean_zero()?.gradient()?.scaled(-1.0))
}

/// Geodesic right side `u_t = grad(Delta_dR^{-1}(f - mean f))` with
/// `f = grad(div u) . u + ((1 - alpha)/2)(div u)^2`; always a gradient
/// field, so the divergence-free part of `u` is frozen.
pub fn geodesic_rhs_nd(u: &TorusVectorField, alpha: AlphaParam) -> Result<TorusVectorField> {
    Ok(nabla_alpha_identity(u, u, alpha)?.scaled(-1.0))
}

/// `u = grad psi + w` with `div w = 0`: returns `(grad psi, w)`.
pub fn helmholtz_split(u: &TorusVectorField) -> Result<(TorusVectorField, TorusVectorField)> {
    let psi = u.div()?.inv_laplace_mean_zero()?.scaled(-1.0);
    let grad_part = psi.gradient()?;
    let div_free = u.axpy(-1.0, &grad_part);
    Ok((grad_part, div_free))
}

/// Time-indexed velocities `u(t)` with their divergences `phi(t) = div u(t)`.
#[derive(Debug, Clone)]
pub struct TorusTrajectory {
    times: Vec<f64>,
    velocities: Vec<TorusVectorField>,
    phis: Vec<TorusField>,
    alpha: f64,
    breakdown: Option<f64>,
}

impl TorusTrajectory {
    /// Wrap externally produced velocity samples (e.g. a closed-form
    /// solution); divergences are computed spectrally.
    pub fn from_samples(
        times: Vec<f64>,
        velocities: Vec<TorusVectorField>,
        alpha: f64,
    ) -> Result<Self> {
        if times.len() != velocities.len() || times.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "{} times for {} fields",
                times.len(),
                velocities.len()
            )));
        }
        if !times.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter(
                "times must be strictly increasing".into(),
            ));
        }
        let phis = velocities
            .iter()
            .map(TorusVectorField::div)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            times,
            velocities,
            phis,
            alpha,
            breakdown: None,
        })
    }

    #[inline]
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    #[inline]
    pub fn velocities(&self) -> &[TorusVectorField] {
        &self.velocities
    }

    /// Divergences `phi(t) = div u(t)` at the stored times.
    #[inline]
    pub fn phis(&self) -> &[TorusField] {
        &self.phis
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn breakdown(&self) -> Option<f64> {
        self.breakdown
    }

    #[inline]
    pub fn grid(&self) -> TorusGrid {
        self.velocities[0].grid()
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Bracketing indices and interpolation weight for time `t`.
    fn bracket(&self, t: f64) -> Result<(usize, usize, f64)> {
        let t_last = self.last_time();
        if !(t >= -1e-12 && t <= t_last + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "t = {t} outside stored range [0, {t_last}]"
            )));
        }
        let t = t.clamp(self.times[0], t_last);
        match self.times.binary_search_by(|probe| probe.total_cmp(&t)) {
            Ok(k) => Ok((k, k, 0.0)),
            Err(k) => {
                let (t0, t1) = (self.times[k - 1], self.times[k]);
                Ok((k - 1, k, (t - t0) / (t1 - t0)))
            }
        }
    }

    /// Velocity at `t` by linear interpolation between stored steps.
    pub fn sample_velocity(&self, t: f64) -> Result<TorusVectorField> {
        let (i, j, lambda) = self.bracket(t)?;
        Ok(self.velocities[i]
            .scaled(1.0 - lambda)
            .axpy(lambda, &self.velocities[j]))
    }
}

/// Fixed-step RK4 integration of [`geodesic_rhs_nd`]. Breakdown (magnitude
/// caps or non-finite values) truncates the trajectory and is recorded, not
/// raised.
pub fn integrate_nd(
    u0: &TorusVectorField,
    alpha: AlphaParam,
    t_final: f64,
    dt: f64,
) -> Result<TorusTrajectory> {
    if !(dt > 0.0 && dt <= 1e-2) {
        return Err(Error::InvalidParameter(format!(
            "dt = {dt} outside (0, 1e-2]"
        )));
    }
    if !(t_final > 0.0) {
        return Err(Error::InvalidParameter(format!("t_final = {t_final} <= 0")));
    }
    let cap = crate::geodesic::BREAKDOWN_CAP;
    let mut times = vec![0.0];
    let mut velocities = vec![u0.clone()];
    let mut phis = vec![u0.div()?];
    let mut breakdown = None;
    let mut u = u0.clone();
    let mut t = 0.0;
    while t < t_final - 1e-12 {
        let h = dt.min(t_final - t);
        let staged = (|| -> Result<TorusVectorField> {
            let k1 = geodesic_rhs_nd(&u, alpha)?;
            let k2 = geodesic_rhs_nd(&u.axpy(0.5 * h, &k1), alpha)?;
            let k3 = geodesic_rhs_nd(&u.axpy(0.5 * h, &k2), alpha)?;
            let k4 = geodesic_rhs_nd(&u.axpy(h, &k3), alpha)?;
            Ok(u.axpy(h / 6.0, &k1)
                .axpy(h / 3.0, &k2)
                .axpy(h / 3.0, &k3)
                .axpy(h / 6.0, &k4))
        })();
        t += h;
        let next = match staged {
            Ok(next) => next,
            Err(Error::NonFinite) => {
                breakdown = Some(t);
                break;
            }
            Err(e) => return Err(e),
        };
        let phi = if next.is_finite() { next.div() } else { Err(Error::NonFinite) };
        match phi {
            Ok(phi) if next.linf() <= cap && phi.is_finite() && phi.linf() <= cap => {
                u = next;
                times.push(t);
                velocities.push(u.clone());
                phis.push(phi);
            }
            _ => {
                breakdown = Some(t);
                break;
            }
        }
    }
    Ok(TorusTrajectory {
        times,
        velocities,
        phis,
        alpha: alpha.value(),
        breakdown,
    })
}

/// Quadratic three-point derivative at the middle time (handles the
/// nonuniform final step).
fn centered_dt(
    t0: f64,
    t1: f64,
    t2: f64,
    f0: &TorusField,
    f1: &TorusField,
    f2: &TorusField,
) -> TorusField {
    let c0 = (t1 - t2) / ((t0 - t1) * (t0 - t2));
    let c1 = (2.0 * t1 - t0 - t2) / ((t1 - t0) * (t1 - t2));
    let c2 = (t1 - t0) / ((t2 - t0) * (t2 - t1));
    f0.scaled(c0).axpy(c1, f1).axpy(c2, f2)
}

/// Residual of the geodesic 1-form equation
/// `d phi_t + d(u . grad phi) + (1 - alpha) phi d phi` at each interior
/// stored time; returns `(t, L_inf residual)` pairs.
pub fn pjn_residual(traj: &TorusTrajectory, alpha: AlphaParam) -> Result<Vec<(f64, f64)>> {
    let n = traj.times.len();
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "residual needs >= 3 time samples, got {n}"
        )));
    }
    let mut out = Vec::with_capacity(n - 2);
    for k in 1..n - 1 {
        let phi = &traj.phis[k];
        let dphi_dt = centered_dt(
            traj.times[k - 1],
            traj.times[k],
            traj.times[k + 1],
            &traj.phis[k - 1],
            phi,
            &traj.phis[k + 1],
        );
        let grad_phi = phi.gradient()?;
        let advect = traj.velocities[k].dot_dealiased(&grad_phi);
        let exact_part = dphi_dt.axpy(1.0, &advect).gradient()?;
        let mut worst = 0.0f64;
        for (a, g) in grad_phi.components().iter().enumerate() {
            let r = exact_part
                .component(a)
                .axpy(1.0 - alpha.value(), &phi.mul_dealiased(g));
            worst = worst.max(r.linf());
        }
        out.push((traj.times[k], worst));
    }
    Ok(out)
}

/// The `alpha = 1` integrable solution in Lagrangian labels: chart lines
/// `a t + b` give the Jacobian density `e^{at+b}/int e^{at+b}` and
/// `phi . eta = a - int a e^{at+b} / int e^{at+b}`.
#[derive(Debug, Clone)]
pub struct Alpha1SolutionNd {
    a: TorusField,
    b: TorusField,
}

impl Alpha1SolutionNd {
    /// `a`, `b` are projected to mean zero (the chart lives on mean-zero
    /// fields).
    pub fn new(a: TorusField, b: TorusField) -> Result<Self> {
        a.same_grid(&b)?;
        let mut a = a;
        let mut b = b;
        a.project_mean_zero();
        b.project_mean_zero();
        Ok(Self { a, b })
    }

    #[inline]
    pub fn grid(&self) -> TorusGrid {
        self.a.grid()
    }

    /// Affine chart value `log Jac - mean log Jac = a t + b`, exact.
    pub fn chart(&self, t: f64) -> TorusField {
        self.a.scaled(t).axpy(1.0, &self.b)
    }

    /// Jacobian density `Jac_mu eta(t) = e^{at+b} / int e^{at+b} dmu`.
    pub fn jacobian(&self, t: f64) -> Result<TorusDensity> {
        TorusDensity::new(self.chart(t).map(f64::exp))
    }

    /// `phi` along the flow: `phi(t) . eta = a - int a e^{at+b}/int e^{at+b}`.
    pub fn phi_lagrangian(&self, t: f64) -> TorusField {
        let exp = self.chart(t).map(f64::exp);
        let shift = self.a.zip(&exp, |av, ev| av * ev).integrate() / exp.integrate();
        self.a.map(|v| v - shift)
    }
}

/// Convenience form of [`Alpha1SolutionNd`]: `(Jac(t), phi(t) . eta)`.
pub fn alpha1_solution_nd(
    a: &TorusField,
    b: &TorusField,
    t: f64,
) -> Result<(TorusDensity, TorusField)> {
    let sol = Alpha1SolutionNd::new(a.clone(), b.clone())?;
    Ok((sol.jacobian(t)?, sol.phi_lagrangian(t)))
}

/// Precomputed Fourier coefficients for band-limited point evaluation.
pub struct TorusInterpolant {
    grid: TorusGrid,
    // Unnormalized forward-FFT coefficients over the full index set.
    coeffs: Vec<Complex64>,
}

impl TorusInterpolant {
    /// Evaluate the trigonometric interpolant at an arbitrary point
    /// (coordinates taken mod 1; Nyquist modes interpolate as cosines).
    pub fn eval(&self, x: &[f64]) -> f64 {
        let grid = self.grid;
        let m = grid.m;
        let tables: Vec<Vec<Complex64>> = (0..grid.dim)
            .map(|a| {
                (0..m)
                    .map(|j| {
                        if j == m / 2 {
                            Complex64::new((PI * m as f64 * x[a]).cos(), 0.0)
                        } else {
                            Complex64::from_polar(1.0, TAU * wavenumber(j, m) as f64 * x[a])
                        }
                    })
                    .collect()
            })
            .collect();
        let mut digits = vec![0usize; grid.dim];
        let mut acc = Complex64::new(0.0, 0.0);
        for (idx, &c) in self.coeffs.iter().enumerate() {
            grid.decode(idx, &mut digits);
            let mut term = c;
            for (a, &j) in digits.iter().enumerate() {
                term *= tables[a][j];
            }
            acc += term;
        }
        acc.re / grid.len() as f64
    }
}

/// Component-wise band-limited evaluation of a vector field.
pub struct TorusVectorInterpolant {
    components: Vec<TorusInterpolant>,
}

impl TorusVectorInterpolant {
    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.eval(x);
        }
    }
}

/// Track particles `dx/dt = u(t, x)` through a stored trajectory with RK4,
/// sub-stepping each stored interval at most `dt` at a time.
///
/// Returns positions indexed `[stored time][particle][axis]`; row 0 is the
/// starting positions.
pub fn advect_points(
    traj: &TorusTrajectory,
    starts: &[Vec<f64>],
    dt: f64,
) -> Result<Vec<Vec<Vec<f64>>>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt = {dt} <= 0")));
    }
    let dim = traj.grid().dim();
    if starts.iter().any(|p| p.len() != dim) {
        return Err(Error::InvalidParameter(
            "particle coordinate count != grid dimension".into(),
        ));
    }
    let interps: Vec<TorusVectorInterpolant> = traj
        .velocities
        .iter()
        .map(TorusVectorField::interpolant)
        .collect();
    // u(t, x) with linear interpolation of the stored fields in t.
    let eval = |k0: usize, k1: usize, lambda: f64, x: &[f64], out: &mut [f64]| {
        let mut v1 = vec![0.0; dim];
        interps[k0].eval(x, out);
        if lambda > 0.0 {
            interps[k1].eval(x, &mut v1);
            for (o, v) in out.iter_mut().zip(&v1) {
                *o = (1.0 - lambda) * *o + lambda * v;
            }
        }
    };
    let mut positions = vec![starts.to_vec()];
    let mut current = starts.to_vec();
    for k in 0..traj.times.len() - 1 {
        let (t0, t1) = (traj.times[k], traj.times[k + 1]);
        let steps = ((t1 - t0) / dt).ceil().max(1.0) as usize;
        let h = (t1 - t0) / steps as f64;
        for s in 0..steps {
            let ts = t0 + s as f64 * h;
            for p in current.iter_mut() {
                let mut k1v = vec![0.0; dim];
                let mut k2v = vec![0.0; dim];
                let mut k3v = vec![0.0; dim];
                let mut k4v = vec![0.0; dim];
                let lam = |tq: f64| ((tq - t0) / (t1 - t0)).clamp(0.0, 1.0);
                eval(k, k + 1, lam(ts), p, &mut k1v);
                let mid1: Vec<f64> = p.iter().zip(&k1v).map(|(x, v)| x + 0.5 * h * v).collect();
                eval(k, k + 1, lam(ts + 0.5 * h), &mid1, &mut k2v);
                let mid2: Vec<f64> = p.iter().zip(&k2v).map(|(x, v)| x + 0.5 * h * v).collect();
                eval(k, k + 1, lam(ts + 0.5 * h), &mid2, &mut k3v);
                let end: Vec<f64> = p.iter().zip(&k3v).map(|(x, v)| x + h * v).collect();
                eval(k, k + 1, lam(ts + h), &end, &mut k4v);
                for a in 0..dim {
                    p[a] += h / 6.0 * (k1v[a] + 2.0 * k2v[a] + 2.0 * k3v[a] + k4v[a]);
                }
            }
        }
        positions.push(current.clone());
    }
    Ok(positions)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2(m: usize) -> TorusGrid {
        TorusGrid::new(2, m).unwrap()
    }

    fn alpha(a: f64) -> AlphaParam {
        AlphaParam::new(a).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(TorusGrid::new(0, 16).is_err());
        assert!(TorusGrid::new(4, 16).is_err());
        assert!(TorusGrid::new(2, 24).is_err()); // not a power of two
        assert!(TorusGrid::new(2, 8).is_err());
        assert_eq!(TorusGrid::new(3, 16).unwrap().len(), 4096);
    }

    #[test]
    fn div_of_constant_is_zero() {
        let g = grid2(16);
        let u = TorusVectorField::new(vec![
            TorusField::constant(g, 1.5),
            TorusField::constant(g, -0.5),
        ])
        .unwrap();
        assert!(u.div().unwrap().linf() <= 1e-14);
    }

    #[test]
    fn div_of_gradient_is_laplacian() {
        let g = grid2(32);
        let psi = TorusField::from_fn(g, |x| (TAU * x[0]).sin() * (2.0 * TAU * x[1]).cos());
        let want = psi.scaled(-(TAU * TAU) * (1.0 + 4.0));
        let got = psi.gradient().unwrap().div().unwrap();
        let err = got.zip(&want, |a, b| a - b).linf();
        assert!(err <= 1e-10, "max error {err:e}");
    }

    #[test]
    fn swirl_is_divergence_free() {
        let g = grid2(32);
        let psi = TorusField::from_fn(g, |x| (TAU * x[0]).cos() * (TAU * x[1]).sin());
        let grad = psi.gradient().unwrap();
        let swirl = TorusVectorField::new(vec![
            grad.component(1).scaled(-1.0),
            grad.component(0).clone(),
        ])
        .unwrap();
        assert!(swirl.div().unwrap().linf() <= 1e-12);
    }

    #[test]
    fn inv_laplace_single_mode() {
        let g = grid2(32);
        let f = TorusField::from_fn(g, |x| (TAU * x[0]).cos());
        let got = f.inv_laplace_mean_zero().unwrap();
        let want = f.scaled(1.0 / (4.0 * PI * PI));
        assert!(got.zip(&want, |a, b| a - b).linf() <= 1e-13);
        assert!(TorusField::constant(g, 3.0)
            .inv_laplace_mean_zero()
            .unwrap()
            .linf()
            <= 1e-13);
    }

    #[test]
    fn inv_laplace_round_trip() {
        let g = grid2(32);
        let f = TorusField::from_fn(g, |x| {
            0.7 + (TAU * x[0]).sin() * (3.0 * TAU * x[1]).cos() + 0.2 * (2.0 * TAU * x[1]).sin()
        });
        let round = f.inv_laplace_mean_zero().unwrap().laplace_de_rham().unwrap();
        let mut tilde = f.clone();
        tilde.project_mean_zero();
        let err = round.zip(&tilde, |a, b| a - b).linf();
        assert!(err <= 1e-10, "max error {err:e}");
    }

    #[test]
    fn lemma_identity_div_of_sharp() {
        // div(-(Delta_dR^{-1} d f)#) = f - mean f.
        let g = grid2(32);
        let f = TorusField::from_fn(g, |x| {
            0.3 + (TAU * x[0]).cos() * (TAU * x[1]).cos() + 0.1 * (2.0 * TAU * x[0]).sin()
        });
        let sharp = f.inv_laplace_mean_zero().unwrap().gradient().unwrap();
        let got = sharp.scaled(-1.0).div().unwrap();
        let mut tilde = f.clone();
        tilde.project_mean_zero();
        assert!(got.zip(&tilde, |a, b| a - b).linf() <= 1e-12);
    }

    #[test]
    fn h1_inner_values() {
        let g = grid2(32);
        let psi = TorusField::from_fn(g, |x| (TAU * x[0]).cos());
        let v = psi.gradient().unwrap();
        // div v = -4 pi^2 cos(2 pi x1); (1/4) int (4 pi^2)^2 cos^2 = 2 pi^4.
        let got = h1_inner_nd(&v, &v).unwrap();
        let want = 2.0 * PI.powi(4);
        assert!((got - want).abs() / want <= 1e-12, "got {got}");

        let swirl_psi = TorusField::from_fn(g, |x| (TAU * x[0]).sin() * (TAU * x[1]).sin());
        let gp = swirl_psi.gradient().unwrap();
        let swirl =
            TorusVectorField::new(vec![gp.component(1).scaled(-1.0), gp.component(0).clone()])
                .unwrap();
        assert!(h1_inner_nd(&swirl, &v).unwrap().abs() <= 1e-12);
        assert_eq!(
            h1_inner_nd(&v, &swirl).unwrap(),
            h1_inner_nd(&swirl, &v).unwrap()
        );
    }

    #[test]
    fn nabla_vanishes_on_divergence_free_w() {
        let g = grid2(32);
        let psi = TorusField::from_fn(g, |x| (TAU * x[0]).sin() * (2.0 * TAU * x[1]).cos());
        let gp = psi.gradient().unwrap();
        let w = TorusVectorField::new(vec![gp.component(1).scaled(-1.0), gp.component(0).clone()])
            .unwrap();
        let v = psi.gradient().unwrap();
        let out = nabla_alpha_identity(&v, &w, alpha(0.3)).unwrap();
        assert!(out.linf() <= 1e-12);
    }

    #[test]
    fn nabla_output_is_gradient() {
        let g = grid2(32);
        let psi = TorusField::from_fn(g, |x| (TAU * x[0]).cos() + (TAU * x[1]).sin());
        let chi = TorusField::from_fn(g, |x| (TAU * x[0]).sin() * (TAU * x[1]).cos());
        let v = psi.gradient().unwrap();
        let w = chi.gradient().unwrap();
        let out = nabla_alpha_identity(&v, &w, alpha(-0.4)).unwrap();
        assert!(out.curl_linf().unwrap() <= 1e-10);
    }

    #[test]
    fn rhs_zero_and_divergence_free() {
        let g = grid2(16);
        assert!(geodesic_rhs_nd(&TorusVectorField::zeros(g), alpha(0.5))
            .unwrap()
            .linf()
            .abs()
            <= 1e-14);
        let psi = TorusField::from_fn(g, |x| (TAU * x[0]).sin() * (TAU * x[1]).sin());
        let gp = psi.gradient().unwrap();
        let swirl =
            TorusVectorField::new(vec![gp.component(1).scaled(-1.0), gp.component(0).clone()])
                .unwrap();
        assert!(geodesic_rhs_nd(&swirl, alpha(0.5)).unwrap().linf() <= 1e-12);
    }

    #[test]
    fn rhs_reduces_to_1d_pj() {
        use crate::circle::{PeriodicField, PeriodicGrid};
        use crate::geodesic::pj_rhs;
        let m = 64;
        let g1 = TorusGrid::new(1, m).unwrap();
        let gc = PeriodicGrid::new(m).unwrap();
        let profile = |x: f64| (TAU * x).sin() / TAU + 0.3 * (2.0 * TAU * x).cos() / TAU;
        let u_nd = TorusVectorField::new(vec![TorusField::from_fn(g1, |x| profile(x[0]))]).unwrap();
        let u_1d = PeriodicField::from_fn(gc, profile);
        for a in [-1.0, -0.3, 0.0, 0.7, 1.0] {
            let got = geodesic_rhs_nd(&u_nd, alpha(a)).unwrap();
            let want = pj_rhs(&u_1d, alpha(a)).unwrap();
            // The torus right side is a mean-zero gradient; pj_rhs carries
            // the advective mean, constant on the circle reduction.
            let mut diff: Vec<f64> = got
                .component(0)
                .values()
                .iter()
                .zip(want.values())
                .map(|(p, q)| p - q)
                .collect();
            let mean = diff.iter().sum::<f64>() / diff.len() as f64;
            for d in &mut diff {
                *d -= mean;
            }
            let err = diff.iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
            assert!(err <= 1e-11, "alpha {a}: error {err:e}");
        }
    }

    #[test]
    fn integrate_nd_zero_data() {
        let g = grid2(16);
        let traj = integrate_nd(&TorusVectorField::zeros(g), alpha(0.5), 0.05, 1e-2).unwrap();
        assert!(traj.breakdown().is_none());
        for u in traj.velocities() {
            assert_eq!(u.linf(), 0.0);
        }
    }

    #[test]
    fn integrate_nd_freezes_divergence_free_part() {
        let g = grid2(16);
        let psi = TorusField::from_fn(g, |x| {
            0.1 * (TAU * x[0]).sin() + 0.05 * (TAU * x[1]).cos()
        });
        let swirl_psi = TorusField::from_fn(g, |x| 0.1 * (TAU * x[0]).sin() * (TAU * x[1]).sin());
        let gp = swirl_psi.gradient().unwrap();
        let u0 = psi.gradient().unwrap().axpy(1.0, &TorusVectorField::new(vec![
            gp.component(1).scaled(-1.0),
            gp.component(0).clone(),
        ])
        .unwrap());
        let traj = integrate_nd(&u0, alpha(0.2), 0.1, 5e-3).unwrap();
        let (_, w0) = helmholtz_split(&traj.velocities()[0]).unwrap();
        let (_, w1) = helmholtz_split(traj.velocities().last().unwrap()).unwrap();
        let drift = w1.axpy(-1.0, &w0).linf();
        assert!(drift <= 1e-10, "divergence-free drift {drift:e}");
    }

    #[test]
    fn chart_linearity_and_jacobian_ode() {
        let g = grid2(32);
        let a = TorusField::from_fn(g, |x| 0.3 * (TAU * x[0]).sin() * (TAU * x[1]).cos());
        let b = TorusField::from_fn(g, |x| 0.2 * (TAU * x[1]).sin());
        let sol = Alpha1SolutionNd::new(a.clone(), b.clone()).unwrap();
        let t = 0.37;
        // log Jac - mean log Jac = a t + b exactly.
        let jac = sol.jacobian(t).unwrap();
        let mut log_jac = jac.as_field().map(f64::ln);
        log_jac.project_mean_zero();
        let err = log_jac.zip(&sol.chart(t), |p, q| p - q).linf();
        assert!(err <= 1e-12, "chart error {err:e}");

        // d/dt Jac = (phi . eta) Jac, by centered finite difference.
        let h = 1e-4;
        let plus = sol.jacobian(t + h).unwrap();
        let minus = sol.jacobian(t - h).unwrap();
        let dj = plus.as_field().zip(minus.as_field(), |p, q| (p - q) / (2.0 * h));
        let want = sol.phi_lagrangian(t).zip(jac.as_field(), |p, j| p * j);
        let err = dj.zip(&want, |p, q| p - q).linf();
        assert!(err <= 1e-6, "Jacobian ODE error {err:e}");
    }

    #[test]
    fn alpha1_trivial_when_a_zero() {
        let g = grid2(16);
        let b = TorusField::from_fn(g, |x| 0.2 * (TAU * x[0]).cos());
        let (jac0, phi0) = alpha1_solution_nd(&TorusField::zeros(g), &b, 0.0).unwrap();
        let (jac1, phi1) = alpha1_solution_nd(&TorusField::zeros(g), &b, 0.8).unwrap();
        assert!(phi0.linf() <= 1e-14);
        assert!(phi1.linf() <= 1e-14);
        let drift = jac0.as_field().zip(jac1.as_field(), |p, q| p - q).linf();
        assert!(drift <= 1e-14);
    }

    #[test]
    fn pjn_residual_zero_trajectory() {
        let g = grid2(16);
        let traj = integrate_nd(&TorusVectorField::zeros(g), alpha(0.0), 0.05, 1e-2).unwrap();
        for (_, r) in pjn_residual(&traj, alpha(0.0)).unwrap() {
            assert_eq!(r, 0.0);
        }
    }

    #[test]
    fn interpolant_reproduces_band_limited() {
        let g = grid2(16);
        let f = TorusField::from_fn(g, |x| {
            (TAU * x[0]).sin() * (2.0 * TAU * x[1]).cos() + 0.4 * (3.0 * TAU * x[1]).sin()
        });
        let interp = f.interpolant();
        for &(x0, x1) in &[(0.12345, 0.6789), (0.0, 0.5), (0.9, 0.05)] {
            let want = (TAU * x0).sin() * (2.0 * TAU * x1).cos() + 0.4 * (3.0 * TAU * x1).sin();
            let got = interp.eval(&[x0, x1]);
            assert!((got - want).abs() <= 1e-12, "at ({x0}, {x1}): {got} vs {want}");
        }
    }

    #[test]
    fn advection_in_constant_field_translates() {
        let g = grid2(16);
        let u = TorusVectorField::new(vec![
            TorusField::constant(g, 0.25),
            TorusField::constant(g, -0.5),
        ])
        .unwrap();
        let traj =
            TorusTrajectory::from_samples(vec![0.0, 0.5, 1.0], vec![u.clone(), u.clone(), u], 0.0)
                .unwrap();
        let paths = advect_points(&traj, &[vec![0.1, 0.2]], 0.05).unwrap();
        let end = &paths.last().unwrap()[0];
        assert!((end[0] - 0.35).abs() <= 1e-12);
        assert!((end[1] - (-0.3)).abs() <= 1e-12);
    }
}
