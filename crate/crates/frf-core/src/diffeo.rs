//! Circle diffeomorphisms fixing `0`, i.e. coset representatives of
//! `D(S^1)/Rot(S^1)`.
//!
//! A diffeomorphism is stored as identity plus a periodic displacement,
//! `eta(x) = x + d(x)` with `d(0) = 0`, which makes the coset representative
//! unique and keeps composition closed. Off-grid values are obtained by
//! band-limited interpolation of the displacement so the whole pipeline
//! retains spectral accuracy.

use crate::circle::{eval_cubic, PeriodicField, PeriodicGrid};
use crate::error::{Error, Result};

/// Positivity floor for the Jacobian `eta_x = 1 + d'`.
pub const EPS_JAC: f64 = 1e-8;

/// Root-solve tolerance for [`CircleDiffeo::invert`].
pub const INVERT_TOL: f64 = 1e-12;

/// Interpolation rule for off-grid evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interp {
    /// Trigonometric interpolation, spectrally accurate.
    #[default]
    Spectral,
    /// Periodic Catmull-Rom, O(h^4); a cheaper fallback.
    Cubic,
}

/// Orientation-preserving circle diffeomorphism with `eta(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleDiffeo {
    displacement: PeriodicField,
}

impl CircleDiffeo {
    /// Build from a periodic displacement, re-anchoring `d(0) = 0` and
    /// checking that `1 + d'` stays above the positivity floor.
    pub fn from_displacement(mut displacement: PeriodicField) -> Result<Self> {
        if !displacement.is_finite() {
            return Err(Error::NonFinite);
        }
        let d0 = displacement.values()[0];
        if d0 != 0.0 {
            for v in displacement.values_mut() {
                *v -= d0;
            }
        }
        let jac_min = displacement
            .derivative()?
            .values()
            .iter()
            .fold(f64::INFINITY, |a, &v| a.min(1.0 + v));
        if jac_min <= EPS_JAC {
            return Err(Error::DegenerateDiffeo(jac_min));
        }
        Ok(Self { displacement })
    }

    pub fn identity(grid: PeriodicGrid) -> Self {
        Self {
            displacement: PeriodicField::zeros(grid),
        }
    }

    #[inline]
    pub fn grid(&self) -> PeriodicGrid {
        self.displacement.grid()
    }

    #[inline]
    pub fn displacement(&self) -> &PeriodicField {
        &self.displacement
    }

    /// Node values `eta(x_j) = x_j + d(x_j)`.
    pub fn node_values(&self) -> Vec<f64> {
        self.grid()
            .nodes()
            .zip(self.displacement.values())
            .map(|(x, d)| x + d)
            .collect()
    }

    /// Evaluate `eta` at an arbitrary point.
    pub fn eval(&self, x: f64, interp: Interp) -> f64 {
        x + match interp {
            Interp::Spectral => self.displacement.interpolant().eval(x),
            Interp::Cubic => eval_cubic(&self.displacement, x),
        }
    }

    /// Jacobian `eta_x = 1 + d'` as a probability density (mass is exactly 1).
    pub fn jacobian(&self) -> Result<Density> {
        let jac = self.displacement.derivative()?.map(|v| 1.0 + v);
        let min = jac.values().iter().cloned().fold(f64::INFINITY, f64::min);
        Density::new(jac).map_err(|_| Error::DegenerateDiffeo(min))
    }

    /// The sphere embedding `eta -> sqrt(Jac eta)`, a unit vector in L^2.
    pub fn sqrt_jac_embed(&self) -> Result<PeriodicField> {
        Ok(self.jacobian()?.into_field().map(f64::sqrt))
    }

    /// Composition `(self . other)(x) = self(other(x))`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.displacement.same_grid(&other.displacement)?;
        let interp = self.displacement.interpolant();
        let values = self
            .grid()
            .nodes()
            .zip(other.displacement.values())
            .map(|(x, d)| d + interp.eval(x + d))
            .collect();
        Self::from_displacement(PeriodicField::new(self.grid(), values)?)
    }

    /// Inverse diffeomorphism by per-node monotone root solving.
    ///
    /// Each node solves `eta(y) = x_j` with a bisection seed and Newton
    /// polish; if Newton fails to converge the solve falls back to pure
    /// bisection.
    pub fn invert(&self) -> Result<Self> {
        let grid = self.grid();
        let d = self.displacement.interpolant();
        let dp = self.displacement.derivative()?.interpolant();
        let eta = |y: f64| y + d.eval(y);
        let values = grid
            .nodes()
            .map(|x| {
                if x == 0.0 {
                    return 0.0;
                }
                invert_monotone(&eta, |y| 1.0 + dp.eval(y), x) - x
            })
            .collect();
        Self::from_displacement(PeriodicField::new(grid, values)?)
    }

    /// Eulerian velocity `V . eta^{-1}` from a Lagrangian one.
    pub fn pushforward_velocity(&self, velocity: &PeriodicField) -> Result<PeriodicField> {
        self.displacement.same_grid(velocity)?;
        let inv = self.invert()?;
        let interp = velocity.interpolant();
        let values = self
            .grid()
            .nodes()
            .zip(inv.displacement.values())
            .map(|(x, d)| interp.eval(x + d))
            .collect();
        PeriodicField::new(self.grid(), values)
    }
}

/// Solve `eta(y) = x` for strictly increasing `eta` with `eta(0)=0, eta(1)=1`.
fn invert_monotone(eta: &impl Fn(f64) -> f64, eta_x: impl Fn(f64) -> f64, x: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..20 {
        let mid = 0.5 * (lo + hi);
        if eta(mid) < x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Newton polish from the bisection seed.
    let mut y = 0.5 * (lo + hi);
    for _ in 0..30 {
        let f = eta(y) - x;
        if f.abs() <= INVERT_TOL {
            return y;
        }
        let step = f / eta_x(y);
        let y_next = y - step;
        if !(lo..=hi).contains(&y_next) {
            break;
        }
        y = y_next;
        if step.abs() <= 1e-15 {
            return y;
        }
    }
    if (eta(y) - x).abs() <= INVERT_TOL {
        return y;
    }
    // Fallback: pure bisection down to machine width.
    while hi - lo > 4.0 * f64::EPSILON {
        let mid = 0.5 * (lo + hi);
        if eta(mid) < x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Smooth positive probability density with unit mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    field: PeriodicField,
}

impl Density {
    /// Validate positivity and normalize to unit mass.
    pub fn new(field: PeriodicField) -> Result<Self> {
        if !field.is_finite() {
            return Err(Error::NonFinite);
        }
        if field.values().iter().any(|&v| v <= 0.0) {
            return Err(Error::InvalidDensity(format!(
                "non-positive value {:e}",
                field.values().iter().cloned().fold(f64::INFINITY, f64::min)
            )));
        }
        let mass = field.integrate();
        let field = if (mass - 1.0).abs() > 1e-15 {
            field.scaled(1.0 / mass)
        } else {
            field
        };
        Ok(Self { field })
    }

    pub fn uniform(grid: PeriodicGrid) -> Self {
        Self {
            field: PeriodicField::constant(grid, 1.0),
        }
    }

    #[inline]
    pub fn grid(&self) -> PeriodicGrid {
        self.field.grid()
    }

    #[inline]
    pub fn as_field(&self) -> &PeriodicField {
        &self.field
    }

    pub fn into_field(self) -> PeriodicField {
        self.field
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        self.field.values()
    }
}

/// Flow map trajectory `t -> eta(t)` produced by [`flow`].
#[derive(Debug, Clone)]
pub struct DiffeoTrajectory {
    pub times: Vec<f64>,
    pub diffeos: Vec<CircleDiffeo>,
}

/// Integrate `d eta/dt = u(t) . eta`, `eta(0) = id`, with classical RK4.
///
/// `velocity` samples the Eulerian field at arbitrary times (integrators
/// interpolate their stored steps linearly in `t`). Every accepted step
/// re-validates the diffeomorphism invariants; a Jacobian collapse aborts
/// with [`Error::Breakdown`] carrying the first bad time.
pub fn flow(
    grid: PeriodicGrid,
    velocity: &dyn Fn(f64) -> Result<PeriodicField>,
    t_final: f64,
    dt: f64,
) -> Result<DiffeoTrajectory> {
    if !(dt > 0.0) || !(t_final >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "flow needs dt > 0 and t_final >= 0, got dt = {dt}, t_final = {t_final}"
        )));
    }
    let n = grid.len();
    let nodes: Vec<f64> = grid.nodes().collect();
    let rhs = |t: f64, d: &[f64]| -> Result<Vec<f64>> {
        let u = velocity(t)?;
        let interp = u.interpolant();
        Ok((0..n).map(|j| interp.eval(nodes[j] + d[j])).collect())
    };

    let mut times = vec![0.0];
    let mut diffeos = vec![CircleDiffeo::identity(grid)];
    let mut d = vec![0.0f64; n];
    let mut t = 0.0;
    while t < t_final - 1e-12 {
        let h = dt.min(t_final - t);
        let k1 = rhs(t, &d)?;
        let d2: Vec<f64> = (0..n).map(|j| d[j] + 0.5 * h * k1[j]).collect();
        let k2 = rhs(t + 0.5 * h, &d2)?;
        let d3: Vec<f64> = (0..n).map(|j| d[j] + 0.5 * h * k2[j]).collect();
        let k3 = rhs(t + 0.5 * h, &d3)?;
        let d4: Vec<f64> = (0..n).map(|j| d[j] + h * k3[j]).collect();
        let k4 = rhs(t + h, &d4)?;
        for j in 0..n {
            d[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        t += h;
        let field = PeriodicField::new(grid, d.clone()).map_err(|_| Error::Breakdown(t))?;
        let eta = CircleDiffeo::from_displacement(field).map_err(|_| Error::Breakdown(t))?;
        times.push(t);
        diffeos.push(eta);
    }
    Ok(DiffeoTrajectory { times, diffeos })
}

/// [`flow`] under a time-independent velocity field.
pub fn flow_constant(u: &PeriodicField, t_final: f64, dt: f64) -> Result<DiffeoTrajectory> {
    flow(u.grid(), &|_| Ok(u.clone()), t_final, dt)
}
