//! Alpha-divergences, the spherical Hellinger distance, the Fisher-Rao
//! matrix on parametric families, and finite-difference recovery of the
//! induced metric and connection.
//!
//! For `|alpha| < 1` the divergence between the densities `p` and `q` is
//!
//! ```text
//! D_alpha(p || q) = (1 - int p^{(1-alpha)/2} q^{(1+alpha)/2}) / (1 - alpha^2)
//! ```
//!
//! and at the endpoints it degenerates to the logarithmic forms
//! `D_{-1}(p || q) = D_{+1}(q || p) = (1/4) int (log p - log q) p`.
//! All divergences are evaluated in density space; diffeomorphism-level
//! entry points delegate through Jacobians, which is what makes them
//! well-defined on the coset space.

use crate::circle::PeriodicField;
use crate::diffeo::{CircleDiffeo, Density};
use crate::error::{Error, Result};

/// Interpolation parameter of the divergence family, `alpha in [-1, 1]`.
///
/// The generic power form is used for `|alpha| < 1 - 1e-9`; beyond that the
/// prefactor `1/(1 - alpha^2)` is singular and the logarithmic endpoint
/// forms take over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaParam(f64);

/// Switch-over threshold to the endpoint forms.
const ENDPOINT_EPS: f64 = 1e-9;

impl AlphaParam {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha.abs() <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha = {alpha} outside [-1, 1]"
            )));
        }
        Ok(Self(alpha))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// True when the logarithmic endpoint form applies.
    #[inline]
    pub fn at_endpoint(self) -> bool {
        self.0.abs() >= 1.0 - ENDPOINT_EPS
    }
}

/// `(1/4) int (log p - log q) p dmu`, the endpoint divergence.
fn log_divergence(p: &Density, q: &Density) -> f64 {
    p.as_field()
        .zip(q.as_field(), |a, b| (a.ln() - b.ln()) * a)
        .integrate()
        / 4.0
}

/// The alpha-divergence `D^(alpha)(rho1 || rho2)`.
pub fn alpha_divergence(rho1: &Density, rho2: &Density, alpha: AlphaParam) -> Result<f64> {
    rho1.as_field().same_grid(rho2.as_field())?;
    let a = alpha.value();
    if alpha.at_endpoint() {
        return Ok(if a < 0.0 {
            log_divergence(rho1, rho2)
        } else {
            log_divergence(rho2, rho1)
        });
    }
    let e1 = (1.0 - a) / 2.0;
    let e2 = (1.0 + a) / 2.0;
    let overlap = rho1
        .as_field()
        .zip(rho2.as_field(), |p, q| p.powf(e1) * q.powf(e2))
        .integrate();
    Ok((1.0 - overlap) / (1.0 - a * a))
}

/// Divergence between diffeomorphisms through their Jacobian densities.
pub fn alpha_divergence_diffeo(
    xi: &CircleDiffeo,
    eta: &CircleDiffeo,
    alpha: AlphaParam,
) -> Result<f64> {
    alpha_divergence(&xi.jacobian()?, &eta.jacobian()?, alpha)
}

/// Spherical Hellinger distance `arccos int sqrt(rho1 rho2) dmu`, in `[0, pi]`.
pub fn hellinger_distance(rho1: &Density, rho2: &Density) -> Result<f64> {
    rho1.as_field().same_grid(rho2.as_field())?;
    let overlap = rho1
        .as_field()
        .zip(rho2.as_field(), |p, q| (p * q).sqrt())
        .integrate();
    Ok(overlap.clamp(-1.0, 1.0).acos())
}

/// A divergence evaluator on pairs of diffeomorphisms.
pub type DivergenceFn<'a> = &'a dyn Fn(&CircleDiffeo, &CircleDiffeo) -> Result<f64>;

/// The alpha-divergence as a [`DivergenceFn`]-shaped closure.
pub fn alpha_divergence_evaluator(
    alpha: AlphaParam,
) -> impl Fn(&CircleDiffeo, &CircleDiffeo) -> Result<f64> {
    move |xi, eta| alpha_divergence_diffeo(xi, eta, alpha)
}

fn perturb(eta: &CircleDiffeo, s: f64, dir: &PeriodicField) -> Result<CircleDiffeo> {
    CircleDiffeo::from_displacement(eta.displacement().axpy(s, dir))
}

/// Metric recovery: `-d/ds d/dt D(eta + sV || eta + tW)` at `s = t = 0`.
///
/// Central second mixed differences at steps `h` and `h/2` combined by one
/// Richardson level. If the probe diffeomorphisms degenerate the step is
/// halved once before giving up.
pub fn metric_from_divergence(
    divergence: DivergenceFn,
    eta: &CircleDiffeo,
    v: &PeriodicField,
    w: &PeriodicField,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0 && h <= 0.1) {
        return Err(Error::InvalidParameter(format!(
            "finite-difference step h = {h} outside (0, 0.1]"
        )));
    }
    let mixed = |h: f64| -> Result<f64> {
        let mut acc = 0.0;
        for (ss, st) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            let first = perturb(eta, ss * h, v)?;
            let second = perturb(eta, st * h, w)?;
            acc += ss * st * divergence(&first, &second)?;
        }
        Ok(-acc / (4.0 * h * h))
    };
    let attempt = |h: f64| -> Result<f64> { Ok((4.0 * mixed(h / 2.0)? - mixed(h)?) / 3.0) };
    match attempt(h) {
        Err(Error::DegenerateDiffeo(_)) => attempt(h / 2.0),
        other => other,
    }
}

/// Connection recovery: the mixed third difference
/// `d/ds d/dt d/dr D(eta + sV + tW || eta + rZ)` at the origin.
///
/// With the first slot extended constantly in the displacement chart this
/// equals `< Gamma^(alpha)_eta(W, V), Z >` in the homogeneous `H^1` metric
/// (the directional-derivative term of the covariant derivative drops out).
pub fn christoffel_from_divergence(
    divergence: DivergenceFn,
    eta: &CircleDiffeo,
    v: &PeriodicField,
    w: &PeriodicField,
    z: &PeriodicField,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0 && h <= 0.1) {
        return Err(Error::InvalidParameter(format!(
            "finite-difference step h = {h} outside (0, 0.1]"
        )));
    }
    let third = |h: f64| -> Result<f64> {
        let mut acc = 0.0;
        for ss in [1.0, -1.0] {
            for st in [1.0, -1.0] {
                let first = CircleDiffeo::from_displacement(
                    eta.displacement().axpy(ss * h, v).axpy(st * h, w),
                )?;
                for sr in [1.0, -1.0] {
                    let second = perturb(eta, sr * h, z)?;
                    acc += ss * st * sr * divergence(&first, &second)?;
                }
            }
        }
        Ok(acc / (8.0 * h * h * h))
    };
    let attempt = |h: f64| -> Result<f64> { Ok((4.0 * third(h / 2.0)? - third(h)?) / 3.0) };
    match attempt(h) {
        Err(Error::DegenerateDiffeo(_)) => attempt(h / 2.0),
        other => other,
    }
}

/// Smooth finite-dimensional family of densities `theta -> rho_theta`.
pub struct ParametricFamily<'a> {
    dim: usize,
    step: f64,
    eval: Box<dyn Fn(&[f64]) -> Result<Density> + Sync + 'a>,
}

impl<'a> ParametricFamily<'a> {
    pub fn new(
        dim: usize,
        step: f64,
        eval: impl Fn(&[f64]) -> Result<Density> + Sync + 'a,
    ) -> Result<Self> {
        if dim == 0 || !(step > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "family needs dim >= 1 and step > 0, got dim = {dim}, step = {step}"
            )));
        }
        Ok(Self {
            dim,
            step,
            eval: Box::new(eval),
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn density(&self, theta: &[f64]) -> Result<Density> {
        (self.eval)(theta)
    }
}

/// Fisher-Rao matrix `g_ij = int d_i log rho d_j log rho rho dmu` with
/// central differences in `theta`; the output is exactly symmetric.
pub fn fisher_rao_matrix(family: &ParametricFamily, theta: &[f64]) -> Result<Vec<Vec<f64>>> {
    let m = family.dim();
    if theta.len() != m {
        return Err(Error::InvalidParameter(format!(
            "theta has {} entries, family has dim {m}",
            theta.len()
        )));
    }
    let h = family.step;
    let rho = family.density(theta)?;
    let mut dlog: Vec<PeriodicField> = Vec::with_capacity(m);
    for i in 0..m {
        let mut tp = theta.to_vec();
        tp[i] += h;
        let mut tm = theta.to_vec();
        tm[i] -= h;
        let rp = family.density(&tp)?;
        let rm = family.density(&tm)?;
        dlog.push(rp.as_field().zip(rm.as_field(), |a, b| {
            (a.ln() - b.ln()) / (2.0 * h)
        }));
    }
    let mut g = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i..m {
            let gij = dlog[i]
                .zip(&dlog[j], |a, b| a * b)
                .zip(rho.as_field(), |ab, r| ab * r)
                .integrate();
            g[i][j] = gij;
            g[j][i] = gij;
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::PeriodicGrid;
    use std::f64::consts::TAU;

    fn grid(n: usize) -> PeriodicGrid {
        PeriodicGrid::new(n).unwrap()
    }

    fn density(g: PeriodicGrid, f: impl Fn(f64) -> f64) -> Density {
        Density::new(PeriodicField::from_fn(g, f)).unwrap()
    }

    #[test]
    fn alpha_param_range() {
        assert!(AlphaParam::new(1.0).is_ok());
        assert!(AlphaParam::new(-1.0).is_ok());
        assert!(AlphaParam::new(1.0000001).is_err());
        assert!(AlphaParam::new(f64::NAN).is_err());
    }

    #[test]
    fn divergence_vanishes_on_diagonal() {
        let g = grid(128);
        let rho = density(g, |x| 1.0 + 0.4 * (TAU * x).cos());
        for a in [-1.0, -0.5, 0.0, 0.5, 1.0] {
            let d = alpha_divergence(&rho, &rho, AlphaParam::new(a).unwrap()).unwrap();
            assert!(d.abs() <= 1e-14, "alpha = {a}: {d:e}");
        }
    }

    #[test]
    fn hellinger_form_at_alpha_zero() {
        // D^(0) = 1 - int sqrt(rho2) for rho1 = 1, against a high-resolution
        // quadrature oracle.
        let g = grid(256);
        let rho1 = Density::uniform(g);
        let rho2 = density(g, |x| 1.0 + 0.3 * (TAU * x).cos());
        let got = alpha_divergence(&rho1, &rho2, AlphaParam::new(0.0).unwrap()).unwrap();
        let m = 4096;
        let oracle = 1.0
            - (0..m)
                .map(|j| (1.0 + 0.3 * (TAU * j as f64 / m as f64).cos()).sqrt())
                .sum::<f64>()
                / m as f64;
        assert!((got - oracle).abs() <= 1e-12, "{got} vs {oracle}");
    }

    #[test]
    fn endpoint_mirror_is_exact() {
        let g = grid(128);
        let p = density(g, |x| 1.0 + 0.3 * (TAU * x).cos());
        let q = density(g, |x| 1.0 - 0.2 * (2.0 * TAU * x).sin());
        let minus = AlphaParam::new(-1.0).unwrap();
        let plus = AlphaParam::new(1.0).unwrap();
        let d1 = alpha_divergence(&p, &q, minus).unwrap();
        let d2 = alpha_divergence(&q, &p, plus).unwrap();
        assert_eq!(d1, d2);
    }

    #[test]
    fn endpoint_continuity() {
        let g = grid(256);
        let p = density(g, |x| 1.0 + 0.3 * (TAU * x).cos());
        let q = density(g, |x| 1.0 - 0.25 * (2.0 * TAU * x).sin());
        for sign in [-1.0, 1.0] {
            let near = alpha_divergence(&p, &q, AlphaParam::new(sign * (1.0 - 1e-6)).unwrap())
                .unwrap();
            let at = alpha_divergence(&p, &q, AlphaParam::new(sign).unwrap()).unwrap();
            assert!((near - at).abs() <= 1e-4, "sign {sign}: {near} vs {at}");
        }
    }

    #[test]
    fn hellinger_distance_basics() {
        let g = grid(256);
        let p = density(g, |x| 1.0 + 0.5 * (TAU * x).cos());
        let q = Density::uniform(g);
        // acos amplifies the quadrature roundoff near overlap 1 to sqrt(eps).
        assert!(hellinger_distance(&p, &p).unwrap() <= 1e-7);
        assert_eq!(
            hellinger_distance(&p, &q).unwrap(),
            hellinger_distance(&q, &p).unwrap()
        );
        // High-resolution quadrature oracle for the overlap integral.
        let m = 4096;
        let overlap = (0..m)
            .map(|j| (1.0 + 0.5 * (TAU * j as f64 / m as f64).cos()).sqrt())
            .sum::<f64>()
            / m as f64;
        let want = overlap.acos();
        let got = hellinger_distance(&q, &p).unwrap();
        assert!((got - want).abs() <= 1e-10, "{got} vs {want}");
    }

    #[test]
    fn alpha_zero_divergence_vs_hellinger() {
        let g = grid(128);
        let p = density(g, |x| 1.0 + 0.3 * (TAU * x).cos() + 0.1 * (3.0 * TAU * x).sin());
        let q = density(g, |x| 1.0 - 0.2 * (2.0 * TAU * x).cos());
        let d0 = alpha_divergence(&p, &q, AlphaParam::new(0.0).unwrap()).unwrap();
        let dh = hellinger_distance(&p, &q).unwrap();
        assert!((d0 - (1.0 - dh.cos())).abs() <= 1e-12);
    }

    #[test]
    fn diffeo_divergence_delegates_to_jacobians() {
        let g = grid(128);
        let xi = CircleDiffeo::from_displacement(PeriodicField::from_fn(g, |x| {
            0.2 * (TAU * x).sin() / TAU
        }))
        .unwrap();
        let eta = CircleDiffeo::from_displacement(PeriodicField::from_fn(g, |x| {
            -0.1 * (2.0 * TAU * x).sin() / TAU
        }))
        .unwrap();
        let alpha = AlphaParam::new(0.5).unwrap();
        let via_diffeo = alpha_divergence_diffeo(&xi, &eta, alpha).unwrap();
        let via_density =
            alpha_divergence(&xi.jacobian().unwrap(), &eta.jacobian().unwrap(), alpha).unwrap();
        assert!((via_diffeo - via_density).abs() <= 1e-14);
        assert!(alpha_divergence_diffeo(&xi, &xi, alpha).unwrap().abs() <= 1e-14);
    }

    #[test]
    fn metric_recovery_zero_direction() {
        let g = grid(128);
        let eta = CircleDiffeo::identity(g);
        let v = PeriodicField::zeros(g);
        let w = PeriodicField::from_fn(g, |x| 0.1 * (TAU * x).sin() / TAU);
        let alpha = AlphaParam::new(0.0).unwrap();
        let d = alpha_divergence_evaluator(alpha);
        let got = metric_from_divergence(&d, &eta, &v, &w, 1e-3).unwrap();
        assert!(got.abs() <= 1e-12);
    }

    #[test]
    fn fisher_rao_single_cosine_family() {
        let g = grid(256);
        let family = ParametricFamily::new(1, 1e-4, move |theta: &[f64]| {
            Density::new(PeriodicField::from_fn(g, |x| 1.0 + theta[0] * (TAU * x).cos()))
        })
        .unwrap();
        let gmat = fisher_rao_matrix(&family, &[0.0]).unwrap();
        assert!((gmat[0][0] - 0.5).abs() <= 1e-8, "g11 = {}", gmat[0][0]);
    }

    #[test]
    fn fisher_rao_reparametrization_scaling() {
        let g = grid(256);
        let base = move |t: f64| {
            Density::new(PeriodicField::from_fn(g, |x| 1.0 + t * (TAU * x).cos()))
        };
        let f1 = ParametricFamily::new(1, 1e-4, move |th: &[f64]| base(th[0])).unwrap();
        let f2 = ParametricFamily::new(1, 1e-4, move |th: &[f64]| base(2.0 * th[0])).unwrap();
        let g1 = fisher_rao_matrix(&f1, &[0.2]).unwrap()[0][0];
        let g2 = fisher_rao_matrix(&f2, &[0.1]).unwrap()[0][0];
        assert!((g2 - 4.0 * g1).abs() <= 1e-5 * g2.abs(), "{g2} vs 4 * {g1}");
    }

    #[test]
    fn fisher_rao_matrix_symmetric() {
        let g = grid(128);
        let family = ParametricFamily::new(2, 1e-4, move |th: &[f64]| {
            Density::new(PeriodicField::from_fn(g, |x| {
                1.0 + th[0] * (TAU * x).cos() + th[1] * (2.0 * TAU * x).sin()
            }))
        })
        .unwrap();
        let gmat = fisher_rao_matrix(&family, &[0.15, -0.1]).unwrap();
        assert_eq!(gmat[0][1], gmat[1][0]);
    }
}
