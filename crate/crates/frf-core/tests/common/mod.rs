//! Shared helpers for the integration suites: analytic trigonometric
//! closures (so oracles never read the spectral pipeline's output), seeded
//! generators, and Gauss-Legendre quadrature oracles for the nonlocal
//! operators.

#![allow(dead_code)]

use std::f64::consts::TAU;

use frf_core::{CircleDiffeo, PeriodicField, PeriodicGrid};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Band-limited function `sum_k a_k sin(2 pi k x) + b_k cos(2 pi k x)`
/// kept as coefficients, so both the spectral code and the quadrature
/// oracles can consume the same exact object.
#[derive(Debug, Clone)]
pub struct TrigPoly {
    /// `(k, sin amplitude, cos amplitude)` with `k >= 1` (mean zero).
    pub terms: Vec<(usize, f64, f64)>,
}

impl TrigPoly {
    pub fn random(rng: &mut ChaCha8Rng, k_max: usize, scale: f64) -> Self {
        let terms = (1..=k_max)
            .map(|k| {
                let damp = scale / (k * k) as f64;
                (
                    k,
                    damp * rng.gen_range(-1.0..1.0),
                    damp * rng.gen_range(-1.0..1.0),
                )
            })
            .collect();
        Self { terms }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(k, a, b)| {
                let t = TAU * k as f64 * x;
                a * t.sin() + b * t.cos()
            })
            .sum()
    }

    pub fn deriv(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(k, a, b)| {
                let w = TAU * k as f64;
                let t = w * x;
                w * (a * t.cos() - b * t.sin())
            })
            .sum()
    }

    pub fn deriv2(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(k, a, b)| {
                let w = TAU * k as f64;
                let t = w * x;
                -w * w * (a * t.sin() + b * t.cos())
            })
            .sum()
    }

    /// `int_0^x` of the polynomial (no constant term, so periodic content
    /// only plus nothing secular).
    pub fn antideriv(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(k, a, b)| {
                let w = TAU * k as f64;
                let t = w * x;
                (a * (1.0 - t.cos()) + b * t.sin()) / w
            })
            .sum()
    }

    pub fn max_abs_deriv(&self) -> f64 {
        (0..4096)
            .map(|j| self.deriv(j as f64 / 4096.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|&(k, a, b)| (k, c * a, c * b))
                .collect(),
        }
    }

    pub fn field(&self, grid: PeriodicGrid) -> PeriodicField {
        PeriodicField::from_fn(grid, |x| self.eval(x))
    }

    /// Sampled with the value at `x = 0` subtracted (coset tangent gauge).
    pub fn tangent_field(&self, grid: PeriodicGrid) -> PeriodicField {
        let at0 = self.eval(0.0);
        PeriodicField::from_fn(grid, |x| self.eval(x) - at0)
    }
}

/// Random displacement with `max |d'|` capped, so `id + d` is a safely
/// non-degenerate diffeomorphism even after finite-difference probing.
pub fn random_displacement(rng: &mut ChaCha8Rng, k_max: usize, slope_cap: f64) -> TrigPoly {
    let raw = TrigPoly::random(rng, k_max, 0.1);
    let m = raw.max_abs_deriv();
    if m > slope_cap {
        raw.scaled(slope_cap / m)
    } else {
        raw
    }
}

pub fn diffeo_from(poly: &TrigPoly, grid: PeriodicGrid) -> CircleDiffeo {
    CircleDiffeo::from_displacement(poly.tangent_field(grid)).unwrap()
}

// 4-point Gauss-Legendre rule on [-1, 1].
const GL_NODES: [f64; 4] = [
    -0.8611363115940526,
    -0.33998104358485626,
    0.33998104358485626,
    0.8611363115940526,
];
const GL_WEIGHTS: [f64; 4] = [
    0.3478548451374538,
    0.6521451548625461,
    0.6521451548625461,
    0.3478548451374538,
];

/// Composite Gauss-Legendre integral of `f` over `[a, b]`.
pub fn integral_gl(f: &dyn Fn(f64) -> f64, a: f64, b: f64, cells: usize) -> f64 {
    let h = (b - a) / cells as f64;
    let mut acc = 0.0;
    for c in 0..cells {
        let mid = a + (c as f64 + 0.5) * h;
        for (node, weight) in GL_NODES.iter().zip(GL_WEIGHTS) {
            acc += weight * f(mid + 0.5 * h * node);
        }
    }
    acc * 0.5 * h
}

/// Double-integral oracle for `A^{-1}` on mean-zero `u`:
/// `A^{-1}u(x) = -int_0^x int_0^y u + x int_0^1 int_0^y u`.
pub fn inverse_a_oracle(u: &dyn Fn(f64) -> f64, x: f64, cells: usize) -> f64 {
    let inner = |y: f64| integral_gl(u, 0.0, y, cells.max(8));
    let first = integral_gl(&inner, 0.0, x, cells);
    let second = integral_gl(&inner, 0.0, 1.0, cells);
    -first + x * second
}
