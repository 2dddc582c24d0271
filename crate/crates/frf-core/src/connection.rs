//! The homogeneous `H^1` metric, the alpha-connection Christoffel maps,
//! covariant differentiation along curves, duality residuals and an
//! experimental curvature evaluator.
//!
//! Conventions follow the covariant-derivative split
//! `nabla_V W = DW . V - Gamma(W, V)`, so the Christoffel map carries the
//! minus sign internally and geodesics satisfy
//! `d^2 gamma / dt^2 = Gamma_gamma(dgamma/dt, dgamma/dt)`.

use crate::circle::{inverse_a, PeriodicField};
use crate::diffeo::CircleDiffeo;
use crate::divergence::AlphaParam;
use crate::error::{Error, Result};

/// Step for the internal finite differences of [`curvature_eval`].
const CURVATURE_FD_STEP: f64 = 1e-3;

/// The `H^1` inner product of tangent vectors at `eta`:
/// `(1/4) int V' W' / eta_x dx`.
pub fn h1_inner(v: &PeriodicField, w: &PeriodicField, eta: &CircleDiffeo) -> Result<f64> {
    v.same_grid(w)?;
    v.same_grid(eta.displacement())?;
    let vx = v.derivative()?;
    let wx = w.derivative()?;
    let jac = eta.jacobian()?;
    // jacobian() normalizes mass, which is exactly 1 here, so values are raw.
    let integrand = vx
        .zip(&wx, |a, b| a * b)
        .zip(jac.as_field(), |ab, j| ab / j);
    Ok(integrand.integrate() / 4.0)
}

/// Christoffel map with the velocities already right-translated to the
/// identity: `Gamma = -((1+alpha)/2) { A^{-1} d/dx (v' w') } . eta` where
/// `v = V . eta^{-1}`, `w = W . eta^{-1}`.
pub fn christoffel_eulerian(
    alpha: AlphaParam,
    eta: &CircleDiffeo,
    w_eulerian: &PeriodicField,
    v_eulerian: &PeriodicField,
) -> Result<PeriodicField> {
    w_eulerian.same_grid(v_eulerian)?;
    w_eulerian.same_grid(eta.displacement())?;
    let grid = w_eulerian.grid();
    let factor = -(1.0 + alpha.value()) / 2.0;
    if factor == 0.0 {
        return Ok(PeriodicField::zeros(grid));
    }
    let prod = v_eulerian
        .derivative()?
        .mul_dealiased(&w_eulerian.derivative()?);
    // The integrand enters under d/dx, so the A^{-1} domain is automatic.
    let mut h = inverse_a(&prod.derivative()?)?;
    h.project_mean_zero(); // harmless; keeps interpolation well-conditioned
    let interp = h.interpolant();
    let mut values: Vec<f64> = grid
        .nodes()
        .zip(eta.displacement().values())
        .map(|(x, d)| factor * interp.eval(x + d))
        .collect();
    // Shift back into the coset tangent space (vanishing at x = 0).
    let at_zero = values[0];
    for v in &mut values {
        *v -= at_zero;
    }
    PeriodicField::new(grid, values)
}

/// The Christoffel map `Gamma^(alpha)_eta(W, V)` on tangent vectors at `eta`.
///
/// Symmetric and bilinear in `(W, V)`; identically zero at `alpha = -1`.
pub fn christoffel(
    alpha: AlphaParam,
    eta: &CircleDiffeo,
    w: &PeriodicField,
    v: &PeriodicField,
) -> Result<PeriodicField> {
    if (1.0 + alpha.value()).abs() < f64::EPSILON {
        return Ok(PeriodicField::zeros(w.grid()));
    }
    let w_e = eta.pushforward_velocity(w)?;
    let v_e = eta.pushforward_velocity(v)?;
    christoffel_eulerian(alpha, eta, &w_e, &v_e)
}

/// Covariant derivative of a field of tangent vectors along a curve:
/// `dW/dt - Gamma^(alpha)_gamma(W, dgamma/dt)`, with centered time
/// differences (second-order one-sided stencils at the ends).
pub fn covariant_derivative(
    alpha: AlphaParam,
    times: &[f64],
    curve: &[CircleDiffeo],
    field: &[PeriodicField],
) -> Result<Vec<PeriodicField>> {
    if times.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "covariant derivative needs at least 3 time samples, got {}",
            times.len()
        )));
    }
    if curve.len() != times.len() || field.len() != times.len() {
        return Err(Error::InvalidParameter(
            "curve, field and times must have equal length".into(),
        ));
    }
    let n = times.len();
    let diff = |samples: &dyn Fn(usize) -> PeriodicField, k: usize| -> PeriodicField {
        if k == 0 {
            three_point_deriv(times[0], times[1], times[2], &samples(0), &samples(1), &samples(2), times[0])
        } else if k == n - 1 {
            three_point_deriv(
                times[n - 3],
                times[n - 2],
                times[n - 1],
                &samples(n - 3),
                &samples(n - 2),
                &samples(n - 1),
                times[n - 1],
            )
        } else {
            three_point_deriv(
                times[k - 1],
                times[k],
                times[k + 1],
                &samples(k - 1),
                &samples(k),
                &samples(k + 1),
                times[k],
            )
        }
    };
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let w_dot = diff(&|i| field[i].clone(), k);
        let gamma_dot = diff(&|i| curve[i].displacement().clone(), k);
        let gamma_term = christoffel(alpha, &curve[k], &field[k], &gamma_dot)?;
        out.push(w_dot.zip(&gamma_term, |a, b| a - b));
    }
    Ok(out)
}

/// Derivative at `t` of the quadratic through `(t_i, f_i)`.
#[allow(clippy::too_many_arguments)]
fn three_point_deriv(
    t0: f64,
    t1: f64,
    t2: f64,
    f0: &PeriodicField,
    f1: &PeriodicField,
    f2: &PeriodicField,
    t: f64,
) -> PeriodicField {
    let c0 = (2.0 * t - t1 - t2) / ((t0 - t1) * (t0 - t2));
    let c1 = (2.0 * t - t0 - t2) / ((t1 - t0) * (t1 - t2));
    let c2 = (2.0 * t - t0 - t1) / ((t2 - t0) * (t2 - t1));
    f0.scaled(c0).axpy(1.0, &f1.scaled(c1)).axpy(1.0, &f2.scaled(c2))
}

/// Residual of the duality identity
/// `X<Y,Z> = <nabla^(alpha)_X Y, Z> + <Y, nabla^(-alpha)_X Z>`
/// at `eta`, with `Y`, `Z` extended right-invariantly and the directional
/// derivative taken as a centered difference along `eta + sV`.
pub fn duality_residual(
    alpha: AlphaParam,
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
    let w_e = eta.pushforward_velocity(w)?;
    let z_e = eta.pushforward_velocity(z)?;
    let v_e = eta.pushforward_velocity(v)?;
    let wx = w_e.derivative()?;
    let zx = z_e.derivative()?;
    let wx_i = wx.interpolant();
    let zx_i = zx.interpolant();

    // <Y, Z> at eta + sV via the chain rule:
    // (1/4) int (w_x . eta_s)(z_x . eta_s) (eta_s)_x dx.
    let inner_at = |s: f64| -> Result<f64> {
        let base = CircleDiffeo::from_displacement(eta.displacement().axpy(s, v))?;
        let jac = base.jacobian()?;
        let grid = base.grid();
        let mut acc = 0.0;
        for (j, x) in grid.nodes().enumerate() {
            let y = x + base.displacement().values()[j];
            acc += wx_i.eval(y) * zx_i.eval(y) * jac.values()[j];
        }
        Ok(acc / (4.0 * grid.len() as f64))
    };
    let directional = (inner_at(h)? - inner_at(-h)?) / (2.0 * h);

    // nabla_X of a right-invariant extension: DY.V = (y_x . eta) V.
    let dir_term = |yx: &PeriodicField| -> Result<PeriodicField> {
        let interp = yx.interpolant();
        let vals: Vec<f64> = eta
            .grid()
            .nodes()
            .zip(eta.displacement().values())
            .zip(v.values())
            .map(|((x, d), vv)| interp.eval(x + d) * vv)
            .collect();
        PeriodicField::new(eta.grid(), vals)
    };
    let minus_alpha = AlphaParam::new(-alpha.value())?;
    let nabla_y = dir_term(&wx)?.zip(&christoffel_eulerian(alpha, eta, &w_e, &v_e)?, |a, b| a - b);
    let nabla_z =
        dir_term(&zx)?.zip(&christoffel_eulerian(minus_alpha, eta, &z_e, &v_e)?, |a, b| a - b);

    let lhs = directional;
    let rhs = h1_inner(&nabla_y, z, eta)? + h1_inner(w, &nabla_z, eta)?;
    Ok((lhs - rhs).abs())
}

/// Output of [`curvature_eval`]: the commutator curvature field and the
/// scalar comparison value `(1 - alpha^2)(X<Y,Z> + Y<X,Z>)`.
#[derive(Debug, Clone)]
pub struct CurvatureReport {
    pub commutator: PeriodicField,
    pub metric_term: f64,
}

/// Experimental evaluator of `R^(alpha)(X, Y) Z` by the commutator
/// definition with chart-constant extensions (so `[X, Y] = 0`), using
/// centered finite differences of the Christoffel map in the base point.
pub fn curvature_eval(
    alpha: AlphaParam,
    eta: &CircleDiffeo,
    x: &PeriodicField,
    y: &PeriodicField,
    z: &PeriodicField,
) -> Result<CurvatureReport> {
    let h = CURVATURE_FD_STEP;
    // nabla_B Z as a function of the base point (Z chart-constant):
    // -Gamma_base(Z, B).
    let nabla_along = |dir: &PeriodicField, other: &PeriodicField| -> Result<PeriodicField> {
        // d/ds [ -Gamma_{eta + s dir}(Z, other) ] + Gamma_eta(Gamma_eta(Z, other), dir)
        let plus = CircleDiffeo::from_displacement(eta.displacement().axpy(h, dir))?;
        let minus = CircleDiffeo::from_displacement(eta.displacement().axpy(-h, dir))?;
        let g_plus = christoffel(alpha, &plus, z, other)?;
        let g_minus = christoffel(alpha, &minus, z, other)?;
        let d_gamma = g_plus.zip(&g_minus, |a, b| (a - b) / (2.0 * h));
        let inner = christoffel(alpha, eta, z, other)?;
        let correction = christoffel(alpha, eta, &inner, dir)?;
        Ok(d_gamma.scaled(-1.0).axpy(1.0, &correction))
    };
    let term_xy = nabla_along(x, y)?;
    let term_yx = nabla_along(y, x)?;
    let commutator = term_xy.zip(&term_yx, |a, b| a - b);

    let d_inner = |dir: &PeriodicField, a: &PeriodicField, b: &PeriodicField| -> Result<f64> {
        let plus = CircleDiffeo::from_displacement(eta.displacement().axpy(h, dir))?;
        let minus = CircleDiffeo::from_displacement(eta.displacement().axpy(-h, dir))?;
        Ok((h1_inner(a, b, &plus)? - h1_inner(a, b, &minus)?) / (2.0 * h))
    };
    let a2 = alpha.value() * alpha.value();
    let metric_term = (1.0 - a2) * (d_inner(x, y, z)? + d_inner(y, x, z)?);
    Ok(CurvatureReport {
        commutator,
        metric_term,
    })
}
