//! Property-based invariants: group laws of the circle diffeomorphisms,
//! the Jacobian chain rule and flow ODE, and the order axioms of the
//! alpha-divergence family.

mod common;

use common::{diffeo_from, random_displacement, rng, TrigPoly};
use frf_core::{
    alpha_divergence_diffeo, flow_constant, h1_inner, AlphaParam, CircleDiffeo, PeriodicField,
    PeriodicGrid,
};
use proptest::prelude::*;

const N: usize = 256;

fn grid() -> PeriodicGrid {
    PeriodicGrid::new(N).unwrap()
}

/// Displacement polynomials from raw coefficient vectors, slope-capped so
/// all composites stay honest diffeomorphisms.
fn poly_from_coeffs(coeffs: &[(f64, f64)], cap: f64) -> TrigPoly {
    let terms = coeffs
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| {
            let k = i + 1;
            let damp = 1.0 / (k * k) as f64;
            (k, damp * a, damp * b)
        })
        .collect();
    let p = TrigPoly { terms };
    let m = p.max_abs_deriv();
    if m > cap {
        p.scaled(cap / m)
    } else {
        p
    }
}

fn coeff_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn inverse_is_two_sided(coeffs in coeff_strategy()) {
        let eta = diffeo_from(&poly_from_coeffs(&coeffs, 0.5), grid());
        let inv = eta.invert().unwrap();
        let left = inv.compose(&eta).unwrap();
        let right = eta.compose(&inv).unwrap();
        prop_assert!(left.displacement().linf() <= 1e-8, "eta^-1 . eta: {:e}", left.displacement().linf());
        prop_assert!(right.displacement().linf() <= 1e-8, "eta . eta^-1: {:e}", right.displacement().linf());
    }

    #[test]
    fn composition_is_associative(
        c1 in coeff_strategy(),
        c2 in coeff_strategy(),
        c3 in coeff_strategy(),
    ) {
        let g = grid();
        let a = diffeo_from(&poly_from_coeffs(&c1, 0.4), g);
        let b = diffeo_from(&poly_from_coeffs(&c2, 0.4), g);
        let c = diffeo_from(&poly_from_coeffs(&c3, 0.4), g);
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        let err = left
            .displacement()
            .zip(right.displacement(), |p, q| p - q)
            .linf();
        prop_assert!(err <= 1e-8, "associativity deviation {err:e}");
    }

    #[test]
    fn identity_is_neutral(coeffs in coeff_strategy()) {
        let g = grid();
        let eta = diffeo_from(&poly_from_coeffs(&coeffs, 0.5), g);
        let id = CircleDiffeo::identity(g);
        for side in [eta.compose(&id).unwrap(), id.compose(&eta).unwrap()] {
            let err = side
                .displacement()
                .zip(eta.displacement(), |p, q| p - q)
                .linf();
            prop_assert!(err <= 1e-10, "identity deviation {err:e}");
        }
    }

    #[test]
    fn jacobian_chain_rule(c1 in coeff_strategy(), c2 in coeff_strategy()) {
        let g = grid();
        let eta = diffeo_from(&poly_from_coeffs(&c1, 0.4), g);
        let xi = diffeo_from(&poly_from_coeffs(&c2, 0.4), g);
        let composed = eta.compose(&xi).unwrap();
        let jac_comp = composed.jacobian().unwrap();
        let jac_eta = eta.jacobian().unwrap().into_field();
        let interp = jac_eta.interpolant();
        let jac_xi = xi.jacobian().unwrap();
        let want: Vec<f64> = g
            .nodes()
            .zip(xi.displacement().values())
            .zip(jac_xi.values())
            .map(|((x, d), jx)| interp.eval(x + d) * jx)
            .collect();
        let mut err = 0.0f64;
        for (got, want) in jac_comp.values().iter().zip(&want) {
            err = err.max((got - want).abs());
        }
        prop_assert!(err <= 1e-7, "chain rule deviation {err:e}");
    }

    #[test]
    fn sqrt_jacobian_embeds_in_unit_sphere(coeffs in coeff_strategy()) {
        let eta = diffeo_from(&poly_from_coeffs(&coeffs, 0.6), grid());
        let s = eta.sqrt_jac_embed().unwrap();
        let norm2 = s.zip(&s, |a, b| a * b).integrate();
        prop_assert!((norm2 - 1.0).abs() <= 1e-12, "norm^2 = {norm2}");
    }

    #[test]
    fn h1_metric_is_positive_on_nonconstant_tangents(
        c1 in coeff_strategy(),
        c2 in coeff_strategy(),
    ) {
        let g = grid();
        let eta = diffeo_from(&poly_from_coeffs(&c1, 0.5), g);
        let v = poly_from_coeffs(&c2, 10.0); // no cap needed for tangents
        let vf = v.tangent_field(g);
        prop_assume!(vf.derivative().unwrap().linf() > 1e-3);
        let ip = h1_inner(&vf, &vf, &eta).unwrap();
        prop_assert!(ip > 0.0, "<V,V> = {ip}");
    }
}

#[test]
fn flow_jacobian_solves_transport_ode() {
    // d/dt Jac(eta_t) = (div u . eta_t) Jac(eta_t) for the flow of a
    // steady field, checked with centered differences in t.
    let g = grid();
    let mut r = rng(0x5eed_0101);
    let p = random_displacement(&mut r, 5, 0.8);
    let u = p.tangent_field(g);
    let traj = flow_constant(&u, 0.3, 1e-3).unwrap();
    let ux = u.derivative().unwrap();
    let ux_i = ux.interpolant();
    let mut worst = 0.0f64;
    for k in (20..traj.times.len() - 1).step_by(40) {
        let dt = traj.times[k + 1] - traj.times[k - 1];
        let plus = traj.diffeos[k + 1].jacobian().unwrap();
        let minus = traj.diffeos[k - 1].jacobian().unwrap();
        let jac = traj.diffeos[k].jacobian().unwrap();
        for (j, x) in g.nodes().enumerate() {
            let dj = (plus.values()[j] - minus.values()[j]) / dt;
            let y = x + traj.diffeos[k].displacement().values()[j];
            let want = ux_i.eval(y) * jac.values()[j];
            worst = worst.max((dj - want).abs());
        }
    }
    assert!(worst <= 1e-5, "transport ODE deviation {worst:e}");
}

#[test]
fn divergences_are_nonnegative_and_mirror_symmetric() {
    let g = grid();
    let mut r = rng(0x5eed_0102);
    let alphas: Vec<f64> = vec![-1.0, -0.7, -0.3, 0.0, 0.4, 0.9, 1.0];
    for _ in 0..25 {
        let xi = diffeo_from(&random_displacement(&mut r, 5, 0.6), g);
        let eta = diffeo_from(&random_displacement(&mut r, 5, 0.6), g);
        for &a in &alphas {
            let alpha = AlphaParam::new(a).unwrap();
            let mirror = AlphaParam::new(-a).unwrap();
            let d = alpha_divergence_diffeo(&xi, &eta, alpha).unwrap();
            assert!(d >= -1e-12, "alpha {a}: D = {d:e}");
            let m = alpha_divergence_diffeo(&eta, &xi, mirror).unwrap();
            assert!((d - m).abs() <= 1e-12, "alpha {a}: mirror gap {:e}", (d - m).abs());
            let self_d = alpha_divergence_diffeo(&xi, &xi, alpha).unwrap();
            assert!(self_d.abs() <= 1e-13, "alpha {a}: D(xi||xi) = {self_d:e}");
        }
    }
}

#[test]
fn coset_invariance_of_divergence() {
    // D only sees the Jacobian coset: composing both arguments with the
    // same rotation-free rescaling of labels leaves it unchanged... but a
    // genuine rotation is not representable with the 0-anchored charts, so
    // instead check invariance of D under swapping to the Jacobian-level
    // evaluator.
    let g = grid();
    let mut r = rng(0x5eed_0103);
    let xi = diffeo_from(&random_displacement(&mut r, 4, 0.5), g);
    let eta = diffeo_from(&random_displacement(&mut r, 4, 0.5), g);
    for a in [-0.5, 0.0, 0.5] {
        let alpha = AlphaParam::new(a).unwrap();
        let via_diffeo = alpha_divergence_diffeo(&xi, &eta, alpha).unwrap();
        let via_density =
            frf_core::alpha_divergence(&xi.jacobian().unwrap(), &eta.jacobian().unwrap(), alpha)
                .unwrap();
        assert!((via_diffeo - via_density).abs() <= 1e-14);
    }
}

#[test]
fn pushforward_round_trip() {
    let g = grid();
    let mut r = rng(0x5eed_0104);
    let eta = diffeo_from(&random_displacement(&mut r, 5, 0.6), g);
    let p = TrigPoly::random(&mut r, 4, 0.5);
    let v = p.tangent_field(g);
    // (V . eta^{-1}) . eta = V.
    let eulerian = eta.pushforward_velocity(&v).unwrap();
    let interp = eulerian.interpolant();
    let back = PeriodicField::from_fn(g, |x| {
        interp.eval(x + eta.displacement().values()[(x * N as f64).round() as usize % N])
    });
    let err = back.zip(&v, |a, b| a - b).linf();
    assert!(err <= 1e-8, "round trip deviation {err:e}");
}
