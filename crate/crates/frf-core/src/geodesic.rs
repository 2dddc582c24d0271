//! Geodesics of the alpha-connections on `D(S^1)/Rot(S^1)`.
//!
//! In Eulerian velocity form the geodesic equation is the generalized
//! Proudman-Johnson equation
//!
//! ```text
//! u_t + u u_x = -((1 + alpha)/2) A^{-1} d/dx (u_x^2)
//! ```
//!
//! integrated here with fixed-step RK4 and 2/3-rule dealiasing of the
//! quadratic products. The family contains three integrable cases with
//! closed-form solutions used as oracles: `alpha = 0` (Hunter-Saxton,
//! conserves `int u_x^2`), `alpha = -1` (mu-Burgers, straight Lagrangian
//! lines) and `alpha = 1` (linear flow in the affine chart
//! `phi(eta) = log eta_x - mean`).

use crate::circle::{cumulative_integral, inverse_a, PeriodicField, PeriodicGrid};
use crate::diffeo::{flow, CircleDiffeo, Density, DiffeoTrajectory};
use crate::divergence::{hellinger_distance, AlphaParam};
use crate::error::{Error, Result};

/// Magnitude cap on `|u|` and `|u_x|`; beyond it the run is recorded as
/// broken down rather than silently continued.
pub const BREAKDOWN_CAP: f64 = 1e6;

/// Time-indexed Eulerian velocity fields produced by the integrators.
#[derive(Debug, Clone)]
pub struct VelocityTrajectory {
    times: Vec<f64>,
    fields: Vec<PeriodicField>,
    alpha: f64,
    breakdown: Option<f64>,
}

impl VelocityTrajectory {
    #[inline]
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    #[inline]
    pub fn fields(&self) -> &[PeriodicField] {
        &self.fields
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// First invalid time, if the integration broke down.
    #[inline]
    pub fn breakdown(&self) -> Option<f64> {
        self.breakdown
    }

    #[inline]
    pub fn grid(&self) -> PeriodicGrid {
        self.fields[0].grid()
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn last_field(&self) -> &PeriodicField {
        self.fields.last().unwrap()
    }

    /// Velocity at `t` by linear interpolation between stored steps.
    pub fn sample(&self, t: f64) -> Result<PeriodicField> {
        let t_last = self.last_time();
        if !(t >= -1e-12 && t <= t_last + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "t = {t} outside stored range [0, {t_last}]"
            )));
        }
        let t = t.clamp(0.0, t_last);
        let k = match self.times.binary_search_by(|probe| probe.total_cmp(&t)) {
            Ok(k) => return Ok(self.fields[k].clone()),
            Err(k) => k,
        };
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let lambda = (t - t0) / (t1 - t0);
        Ok(self.fields[k - 1]
            .scaled(1.0 - lambda)
            .axpy(lambda, &self.fields[k]))
    }

    /// Flow map trajectory `d eta/dt = u(t) . eta` of the stored velocities.
    pub fn flow(&self, dt: f64) -> Result<DiffeoTrajectory> {
        flow(self.grid(), &|t| self.sample(t), self.last_time(), dt)
    }
}

/// Right-hand side `u_t` of the generalized Proudman-Johnson equation.
pub fn pj_rhs(u: &PeriodicField, alpha: AlphaParam) -> Result<PeriodicField> {
    if !u.is_finite() {
        return Err(Error::NonFinite);
    }
    let ux = u.derivative()?;
    let advect = u.mul_dealiased(&ux).scaled(-1.0);
    let factor = (1.0 + alpha.value()) / 2.0;
    if factor == 0.0 {
        // alpha = -1: plain inviscid Burgers right side.
        return Ok(advect);
    }
    let mut ux2 = ux.mul_dealiased(&ux);
    ux2.project_mean_zero();
    let nonlocal = inverse_a(&ux2.derivative()?)?;
    Ok(advect.axpy(-factor, &nonlocal))
}

/// `C = -((1 + alpha)/2) int u_x^2 dx`, conserved along Hunter-Saxton
/// (`alpha = 0`) trajectories.
pub fn conserved_c(u: &PeriodicField, alpha: AlphaParam) -> Result<f64> {
    let ux = u.derivative()?;
    Ok(-(1.0 + alpha.value()) / 2.0 * ux.zip(&ux, |a, b| a * b).integrate())
}

/// Fixed-step RK4 integration of [`pj_rhs`].
///
/// Breakdown (magnitude caps exceeded or non-finite values) is data, not
/// failure: the partial trajectory is returned with [`VelocityTrajectory::breakdown`]
/// set to the first invalid time.
pub fn integrate_pj(
    u0: &PeriodicField,
    alpha: AlphaParam,
    t_final: f64,
    dt: f64,
) -> Result<VelocityTrajectory> {
    if !(dt > 0.0 && dt <= 1e-2) {
        return Err(Error::InvalidParameter(format!(
            "dt = {dt} outside (0, 1e-2]"
        )));
    }
    if !(t_final > 0.0) {
        return Err(Error::InvalidParameter(format!("t_final = {t_final} <= 0")));
    }
    if u0.values()[0].abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "u0(0) = {:e} must vanish (coset tangent space)",
            u0.values()[0]
        )));
    }
    let mut times = vec![0.0];
    let mut fields = vec![u0.clone()];
    let mut breakdown = None;
    let mut u = u0.clone();
    let mut t = 0.0;
    'steps: while t < t_final - 1e-12 {
        let h = dt.min(t_final - t);
        let staged = (|| -> Result<PeriodicField> {
            let k1 = pj_rhs(&u, alpha)?;
            let k2 = pj_rhs(&u.axpy(0.5 * h, &k1), alpha)?;
            let k3 = pj_rhs(&u.axpy(0.5 * h, &k2), alpha)?;
            let k4 = pj_rhs(&u.axpy(h, &k3), alpha)?;
            Ok(u.axpy(h / 6.0, &k1)
                .axpy(h / 3.0, &k2)
                .axpy(h / 3.0, &k3)
                .axpy(h / 6.0, &k4))
        })();
        t += h;
        let next = match staged {
            Ok(next) => next,
            Err(Error::NonFinite) | Err(Error::NotMeanZero(_)) => {
                breakdown = Some(t);
                break 'steps;
            }
            Err(e) => return Err(e),
        };
        let healthy = next.is_finite()
            && next.linf() <= BREAKDOWN_CAP
            && next
                .derivative()
                .map(|d| d.is_finite() && d.linf() <= BREAKDOWN_CAP)
                .unwrap_or(false);
        if !healthy {
            breakdown = Some(t);
            break 'steps;
        }
        u = next;
        times.push(t);
        fields.push(u.clone());
    }
    Ok(VelocityTrajectory {
        times,
        fields,
        alpha: alpha.value(),
        breakdown,
    })
}

/// Affine chart of the flat connection at `alpha = 1`:
/// `phi(eta) = log eta_x - int log eta_x dx`, a mean-zero field.
pub fn affine_chart_phi(eta: &CircleDiffeo) -> Result<PeriodicField> {
    let mut chart = eta.jacobian()?.into_field().map(f64::ln);
    chart.project_mean_zero();
    Ok(chart)
}

/// Inverse of the affine chart:
/// `eta(x) = int_0^x e^f dy / int_0^1 e^f dy`.
///
/// Constant offsets of `f` cancel in the ratio, so only the mean-zero part
/// of `f` matters.
pub fn inverse_phi(f: &PeriodicField) -> Result<CircleDiffeo> {
    let exp = f.map(f64::exp);
    let total = exp.integrate();
    let cum = cumulative_integral(&exp);
    let grid = f.grid();
    let values = grid
        .nodes()
        .enumerate()
        .map(|(j, x)| cum[j] / total - x)
        .collect();
    CircleDiffeo::from_displacement(PeriodicField::new(grid, values)?)
}

/// Closed-form `alpha = 1` geodesic through mean-zero chart data
/// `(a, b) -> eta(t) = phi^{-1}(a t + b)`, with the Eulerian velocity
/// `u = (d eta/dt) . eta^{-1}` obtained by differentiating under the
/// integral sign.
pub fn alpha1_solution(
    a: &PeriodicField,
    b: &PeriodicField,
    t: f64,
) -> Result<(CircleDiffeo, PeriodicField)> {
    a.same_grid(b)?;
    let grid = a.grid();
    let chart = a.scaled(t).axpy(1.0, b);
    let exp = chart.map(f64::exp);
    let m = exp.integrate();
    let p = cumulative_integral(&exp);
    let a_exp = a.zip(&exp, |av, ev| av * ev);
    let q_total = a_exp.integrate();
    let q = cumulative_integral(&a_exp);

    let eta_values: Vec<f64> = p.iter().map(|&pv| pv / m).collect();
    let displacement: Vec<f64> = grid
        .nodes()
        .zip(&eta_values)
        .map(|(x, &e)| e - x)
        .collect();
    let eta = CircleDiffeo::from_displacement(PeriodicField::new(grid, displacement)?)?;

    // d eta/dt = (Q - q eta)/m is periodic: the secular parts of Q and
    // q * eta cancel.
    let deta_dt = PeriodicField::new(
        grid,
        (0..grid.len())
            .map(|j| (q[j] - q_total * eta_values[j]) / m)
            .collect(),
    )?;
    let u = eta.pushforward_velocity(&deta_dt)?;
    Ok((eta, u))
}

/// Breakdown time of the `alpha = -1` flat geodesic: `-1/min u0'` when the
/// initial slope dips below zero, infinity otherwise.
pub fn alpham1_breakdown_time(u0: &PeriodicField) -> Result<f64> {
    let min_slope = u0
        .derivative()?
        .values()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    Ok(if min_slope < 0.0 {
        -1.0 / min_slope
    } else {
        f64::INFINITY
    })
}

/// Closed-form `alpha = -1` geodesic: straight Lagrangian lines
/// `eta(t) = id + t u0`, Eulerian velocity `u(t) = u0 . eta(t)^{-1}`
/// (inviscid Burgers by characteristics).
pub fn alpham1_solution(u0: &PeriodicField, t: f64) -> Result<(CircleDiffeo, PeriodicField)> {
    if u0.values()[0].abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "u0(0) = {:e} must vanish",
            u0.values()[0]
        )));
    }
    let t_star = alpham1_breakdown_time(u0)?;
    if t >= t_star {
        return Err(Error::Breakdown(t_star));
    }
    // Just below t* the Jacobian 1 + t u0' can dip under the positivity
    // floor; report that as the breakdown it is.
    let eta = match CircleDiffeo::from_displacement(u0.scaled(t)) {
        Ok(eta) => eta,
        Err(Error::DegenerateDiffeo(_)) => return Err(Error::Breakdown(t_star)),
        Err(e) => return Err(e),
    };
    let u = eta.pushforward_velocity(u0)?;
    Ok((eta, u))
}

/// Great-circle density geodesic for `alpha = 0`:
/// `sqrt(rho(t)) = [sin((1-t) theta) sqrt(rho0) + sin(t theta) sqrt(rho1)] / sin(theta)`
/// with `theta` the spherical Hellinger distance; output is renormalized.
pub fn alpha0_density_geodesic(rho0: &Density, rho1: &Density, t: f64) -> Result<Density> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!("t = {t} outside [0, 1]")));
    }
    rho0.as_field().same_grid(rho1.as_field())?;
    let overlap = rho0
        .as_field()
        .zip(rho1.as_field(), |p, q| (p * q).sqrt())
        .integrate();
    if overlap <= 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "densities nearly antipodal: overlap {overlap:e}"
        )));
    }
    let theta = hellinger_distance(rho0, rho1)?;
    let (c0, c1) = if theta < 1e-12 {
        (1.0 - t, t)
    } else {
        (
            ((1.0 - t) * theta).sin() / theta.sin(),
            (t * theta).sin() / theta.sin(),
        )
    };
    let sqrt_interp = rho0
        .as_field()
        .zip(rho1.as_field(), |p, q| c0 * p.sqrt() + c1 * q.sqrt());
    Density::new(sqrt_interp.zip(&sqrt_interp, |a, b| a * b))
}
