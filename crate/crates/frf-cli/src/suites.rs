//! Named validation suites behind `frf validate`: deterministic,
//! fixed-data renditions of the library invariants, reported as measured
//! residuals against pinned tolerances.

use std::f64::consts::{PI, TAU};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use frf_core::{
    alpha0_density_geodesic, alpha1_solution, alpha_divergence, alpha_divergence_diffeo,
    alpham1_solution, conserved_c, cumulative_integral, duality_residual, geodesic_rhs_nd,
    helmholtz_split, hellinger_distance, integrate_nd, integrate_pj, inverse_a, pj_rhs,
    pjn_residual, AlphaParam, CircleDiffeo, Density, PeriodicField, PeriodicGrid, TorusField,
    TorusGrid, TorusVectorField,
};

use crate::{Failure, Suite};

#[derive(Serialize, Clone)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn check(suite: &str, name: &str, residual: f64, tolerance: f64) -> Check {
    Check {
        suite: suite.to_string(),
        name: name.to_string(),
        residual,
        tolerance,
        pass: residual.is_finite() && residual <= tolerance,
    }
}

pub fn suite_list(suite: Suite) -> Vec<Suite> {
    match suite {
        Suite::All => vec![
            Suite::Calculus,
            Suite::Group,
            Suite::Divergence,
            Suite::Duality,
            Suite::Geodesic1d,
            Suite::TorusNd,
        ],
        single => vec![single],
    }
}

/// Run the suites in `list`, fanning out over at most `cap` worker
/// threads; results come back in list order regardless of scheduling.
pub fn run_suites(list: &[Suite], n: usize, cap: usize) -> Result<Vec<Check>, Failure> {
    let slots: Vec<Mutex<Option<Result<Vec<Check>, Failure>>>> =
        list.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = cap.min(list.len()).max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= list.len() {
                    break;
                }
                let result = run_one(list[i], n);
                *slots[i].lock().unwrap() = Some(result);
            });
        }
    });
    let mut checks = Vec::new();
    for slot in slots {
        match slot.into_inner().unwrap() {
            Some(Ok(mut c)) => checks.append(&mut c),
            Some(Err(e)) => return Err(e),
            None => return Err(Failure::Internal("suite worker never ran".into())),
        }
    }
    Ok(checks)
}

fn run_one(suite: Suite, n: usize) -> Result<Vec<Check>, Failure> {
    match suite {
        Suite::Calculus => suite_calculus(n),
        Suite::Group => suite_group(n),
        Suite::Divergence => suite_divergence(n),
        Suite::Duality => suite_duality(n),
        Suite::Geodesic1d => suite_geodesic_1d(n),
        Suite::TorusNd => suite_torus_nd(),
        Suite::All => unreachable!("expanded by suite_list"),
    }
}

fn alpha(a: f64) -> AlphaParam {
    AlphaParam::new(a).unwrap()
}

fn test_field(grid: PeriodicGrid) -> PeriodicField {
    PeriodicField::from_fn(grid, |x| (TAU * x).sin() + 0.5 * (2.0 * TAU * x).cos())
}

fn suite_calculus(n: usize) -> Result<Vec<Check>, Failure> {
    let grid = PeriodicGrid::new(n)?;
    let u = test_field(grid);

    let w = inverse_a(&u)?;
    let back = w.derivative()?.derivative()?.scaled(-1.0);
    let r1 = back.zip(&u, |p, q| p - q).linf();

    let f = PeriodicField::new(grid, cumulative_integral(&u))?;
    let r2 = f.derivative()?.zip(&u, |p, q| p - q).linf();

    let d = PeriodicField::from_fn(grid, |x| (TAU * x).sin()).derivative()?;
    let want = PeriodicField::from_fn(grid, |x| TAU * (TAU * x).cos());
    let r3 = d.zip(&want, |p, q| p - q).linf();

    Ok(vec![
        check("calculus", "inverse_a_left_inverse", r1, 1e-8),
        check("calculus", "cumulative_integral_derivative", r2, 1e-10),
        check("calculus", "spectral_derivative", r3, 1e-10),
    ])
}

fn displacement(grid: PeriodicGrid, coeffs: &[(usize, f64, f64)]) -> CircleDiffeo {
    let c: Vec<(usize, f64, f64)> = coeffs.to_vec();
    let d = PeriodicField::from_fn(grid, move |x| {
        c.iter()
            .map(|&(k, a, b)| {
                let t = TAU * k as f64 * x;
                a * t.sin() + b * t.cos()
            })
            .sum::<f64>()
    });
    let anchored = {
        let at0 = d.values()[0];
        d.map(|v| v - at0)
    };
    CircleDiffeo::from_displacement(anchored).unwrap()
}

fn suite_group(n: usize) -> Result<Vec<Check>, Failure> {
    let grid = PeriodicGrid::new(n)?;
    let eta1 = displacement(grid, &[(1, 0.05, 0.0), (2, 0.0, 0.03)]);
    let eta2 = displacement(grid, &[(1, 0.0, 0.02), (2, -0.04, 0.0)]);
    let eta3 = displacement(grid, &[(3, 0.03, 0.0)]);

    let inv = eta1.invert()?;
    let r1 = inv
        .compose(&eta1)?
        .displacement()
        .linf()
        .max(eta1.compose(&inv)?.displacement().linf());

    let left = eta1.compose(&eta2)?.compose(&eta3)?;
    let right = eta1.compose(&eta2.compose(&eta3)?)?;
    let r2 = left
        .displacement()
        .zip(right.displacement(), |p, q| p - q)
        .linf();

    let composed = eta1.compose(&eta2)?;
    let jac_outer = eta1.jacobian()?.into_field();
    let interp = jac_outer.interpolant();
    let jac_inner = eta2.jacobian()?;
    let jac_composed = composed.jacobian()?;
    let mut r3 = 0.0f64;
    for (j, x) in grid.nodes().enumerate() {
        let want = interp.eval(x + eta2.displacement().values()[j]) * jac_inner.values()[j];
        r3 = r3.max((jac_composed.values()[j] - want).abs());
    }

    Ok(vec![
        check("group", "inverse_round_trip", r1, 1e-8),
        check("group", "composition_associative", r2, 1e-8),
        check("group", "jacobian_chain_rule", r3, 1e-7),
    ])
}

fn suite_divergence(n: usize) -> Result<Vec<Check>, Failure> {
    let grid = PeriodicGrid::new(n)?;
    let xi = displacement(grid, &[(1, 0.06, 0.0), (2, 0.0, -0.03)]);
    let eta = displacement(grid, &[(1, 0.0, 0.04), (3, 0.02, 0.0)]);
    let alphas = [-1.0, -0.5, 0.0, 0.5, 1.0];

    let mut min_d = f64::INFINITY;
    let mut mirror = 0.0f64;
    let mut self_d = 0.0f64;
    let mut coset = 0.0f64;
    for &a in &alphas {
        let d = alpha_divergence_diffeo(&xi, &eta, alpha(a))?;
        min_d = min_d.min(d);
        let m = alpha_divergence_diffeo(&eta, &xi, alpha(-a))?;
        mirror = mirror.max((d - m).abs());
        self_d = self_d.max(alpha_divergence_diffeo(&xi, &xi, alpha(a))?.abs());
        let via_density = alpha_divergence(&xi.jacobian()?, &eta.jacobian()?, alpha(a))?;
        coset = coset.max((d - via_density).abs());
    }

    Ok(vec![
        check("divergence", "nonnegative", (-min_d).max(0.0), 1e-12),
        check("divergence", "mirror_symmetry", mirror, 1e-12),
        check("divergence", "self_divergence", self_d, 1e-13),
        check("divergence", "coset_consistency", coset, 1e-13),
    ])
}

fn tangent(grid: PeriodicGrid, coeffs: &[(usize, f64, f64)]) -> PeriodicField {
    let c: Vec<(usize, f64, f64)> = coeffs.to_vec();
    let raw = PeriodicField::from_fn(grid, move |x| {
        c.iter()
            .map(|&(k, a, b)| {
                let t = TAU * k as f64 * x;
                a * t.sin() + b * t.cos()
            })
            .sum::<f64>()
    });
    let at0 = raw.values()[0];
    raw.map(|v| v - at0)
}

fn suite_duality(n: usize) -> Result<Vec<Check>, Failure> {
    let grid = PeriodicGrid::new(n)?;
    let eta = displacement(grid, &[(1, 0.05, 0.0), (2, 0.0, 0.03)]);
    let v = tangent(grid, &[(1, 0.3, 0.0), (2, 0.0, 0.1)]);
    let w = tangent(grid, &[(1, 0.0, 0.2), (3, 0.1, 0.0)]);
    let z = tangent(grid, &[(2, 0.25, 0.0), (1, 0.0, -0.15)]);
    let mut worst = 0.0f64;
    for a in [0.0, 0.25, 0.5, 0.75, 1.0] {
        worst = worst.max(duality_residual(alpha(a), &eta, &v, &w, &z, 1e-4)?);
    }
    Ok(vec![check("duality", "pair_duality_max_residual", worst, 1e-6)])
}

fn suite_geodesic_1d(n: usize) -> Result<Vec<Check>, Failure> {
    let grid = PeriodicGrid::new(n)?;

    // alpha = 1 against the affine chart closed form.
    let a = PeriodicField::from_fn(grid, |x| 0.3 * (TAU * x).sin());
    let b = PeriodicField::from_fn(grid, |x| 0.2 * (TAU * x).cos());
    let (_, u0) = alpha1_solution(&a, &b, 0.0)?;
    let traj = integrate_pj(&u0, alpha(1.0), 0.2, 1e-3)?;
    let mut r1 = 0.0f64;
    for k in (0..traj.times().len()).step_by(40) {
        let (_, u_exact) = alpha1_solution(&a, &b, traj.times()[k])?;
        r1 = r1.max(traj.fields()[k].zip(&u_exact, |p, q| p - q).linf());
    }

    // alpha = -1 against characteristics.
    let w0 = PeriodicField::from_fn(grid, |x| (TAU * x).sin() / PI);
    let traj_b = integrate_pj(&w0, alpha(-1.0), 0.2, 1e-3)?;
    let (_, w_exact) = alpham1_solution(&w0, traj_b.last_time())?;
    let r2 = traj_b.last_field().zip(&w_exact, |p, q| p - q).linf();

    // alpha = 0 conservation of int u_x^2.
    let traj_c = integrate_pj(&w0, alpha(0.0), 0.3, 1e-3)?;
    let c0 = conserved_c(&w0, alpha(0.0))?;
    let mut r3 = 0.0f64;
    for u in traj_c.fields() {
        r3 = r3.max((conserved_c(u, alpha(0.0))? - c0).abs() / c0.abs());
    }

    // alpha = 0 density path on the great circle (spot check at midpoint).
    let flow = traj_c.flow(1e-3)?;
    let rho0 = Density::uniform(grid);
    let rho1 = flow.diffeos.last().unwrap().jacobian()?;
    let mid = flow.diffeos[flow.diffeos.len() / 2].jacobian()?;
    let tau = hellinger_distance(&rho0, &mid)? / hellinger_distance(&rho0, &rho1)?;
    let circle = alpha0_density_geodesic(&rho0, &rho1, tau)?;
    let r4 = mid
        .as_field()
        .zip(circle.as_field(), |p, q| p - q)
        .linf();

    Ok(vec![
        check("geodesic-1d", "alpha1_closed_form", r1, 1e-5),
        check("geodesic-1d", "alpham1_characteristics", r2, 1e-5),
        check("geodesic-1d", "alpha0_conservation_drift", r3, 1e-8),
        check("geodesic-1d", "alpha0_great_circle", r4, 1e-4),
    ])
}

fn suite_torus_nd() -> Result<Vec<Check>, Failure> {
    let m = 32;
    let g2 = TorusGrid::new(2, m)?;

    // Integrator against its own 1-form residual.
    let psi = TorusField::from_fn(g2, |x| {
        0.01 * ((TAU * x[0]).sin() + (TAU * x[0]).sin() * (TAU * x[1]).cos())
    });
    let u0 = psi.gradient()?;
    let traj = integrate_nd(&u0, alpha(0.5), 0.05, 1e-3)?;
    let r1 = pjn_residual(&traj, alpha(0.5))?
        .into_iter()
        .fold(0.0f64, |acc, (_, r)| acc.max(r));

    // Helmholtz split: exactness of the two parts and recomposition.
    let swirl_psi = TorusField::from_fn(g2, |x| 0.05 * (TAU * x[0]).sin() * (TAU * x[1]).sin());
    let gp = swirl_psi.gradient()?;
    let swirl = TorusVectorField::new(vec![gp.component(1).scaled(-1.0), gp.component(0).clone()])?;
    let u = u0.axpy(1.0, &swirl);
    let (grad_part, div_free) = helmholtz_split(&u)?;
    let r2 = div_free
        .div()?
        .linf()
        .max(grad_part.curl_linf()?)
        .max(u.axpy(-1.0, &grad_part.axpy(1.0, &div_free)).linf());

    // n = 1 reduction of the geodesic right-hand side.
    let g1t = TorusGrid::new(1, m)?;
    let g1c = PeriodicGrid::new(m)?;
    let u1c = PeriodicField::from_fn(g1c, |x| 0.3 * (TAU * x).sin() + 0.1 * (2.0 * TAU * x).cos());
    let u1t = TorusVectorField::new(vec![TorusField::from_fn(g1t, |x| {
        0.3 * (TAU * x[0]).sin() + 0.1 * (2.0 * TAU * x[0]).cos()
    })])?;
    let nd = geodesic_rhs_nd(&u1t, alpha(0.5))?;
    let circle = pj_rhs(&u1c, alpha(0.5))?;
    let mut diff: Vec<f64> = nd
        .component(0)
        .values()
        .iter()
        .zip(circle.values())
        .map(|(p, q)| p - q)
        .collect();
    let shift = diff.iter().sum::<f64>() / diff.len() as f64;
    let r3 = diff
        .iter_mut()
        .map(|d| (*d - shift).abs())
        .fold(0.0f64, f64::max);

    Ok(vec![
        check("torus-nd", "integrator_residual", r1, 1e-4),
        check("torus-nd", "helmholtz_split", r2, 1e-10),
        check("torus-nd", "rhs_1d_reduction", r3, 1e-10),
    ])
}
