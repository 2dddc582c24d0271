//! Parsing of initial-data specs: the `trig:` coefficient grammar for the
//! circle and the named presets for circle and torus fields.

use std::f64::consts::TAU;

use frf_core::{Density, PeriodicField, PeriodicGrid, TorusField, TorusGrid, TorusVectorField};

use crate::Failure;

/// `trig:a1,b1;a2,b2;...` -> coefficient list of
/// `sum_k a_k sin(2 pi k x) + b_k cos(2 pi k x)`.
pub fn parse_trig(spec: &str) -> Result<Vec<(f64, f64)>, Failure> {
    let body = spec.strip_prefix("trig:").ok_or_else(|| {
        Failure::Config(format!(
            "expected `trig:a1,b1;a2,b2;...`, got `{spec}`"
        ))
    })?;
    let mut coeffs = Vec::new();
    for (k, term) in body.split(';').enumerate() {
        let mut parts = term.splitn(2, ',');
        let a = parts.next().unwrap_or("");
        let b = parts.next().ok_or_else(|| {
            Failure::Config(format!(
                "term {} of `{spec}` needs the form `a,b`",
                k + 1
            ))
        })?;
        let parse = |s: &str| -> Result<f64, Failure> {
            s.trim().parse::<f64>().map_err(|_| {
                Failure::Config(format!("`{s}` in `{spec}` is not a number"))
            })
        };
        coeffs.push((parse(a)?, parse(b)?));
    }
    Ok(coeffs)
}

pub fn trig_eval(coeffs: &[(f64, f64)], x: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| {
            let t = TAU * (i + 1) as f64 * x;
            a * t.sin() + b * t.cos()
        })
        .sum()
}

/// Density spec: `uniform` or `trig:...` added to the constant 1.
pub fn parse_density(spec: &str, grid: PeriodicGrid) -> Result<Density, Failure> {
    if spec == "uniform" {
        return Ok(Density::uniform(grid));
    }
    let coeffs = parse_trig(spec)?;
    let field = PeriodicField::from_fn(grid, |x| 1.0 + trig_eval(&coeffs, x));
    Ok(Density::new(field)?)
}

/// Circle velocity spec, anchored to vanish at x = 0 (coset gauge).
pub fn parse_velocity_1d(spec: &str, grid: PeriodicGrid) -> Result<PeriodicField, Failure> {
    match spec {
        "zero" => Ok(PeriodicField::zeros(grid)),
        "sine" => Ok(PeriodicField::from_fn(grid, |x| {
            (TAU * x).sin() / std::f64::consts::PI
        })),
        _ => {
            let coeffs = parse_trig(spec)?;
            let at0 = trig_eval(&coeffs, 0.0);
            Ok(PeriodicField::from_fn(grid, |x| {
                trig_eval(&coeffs, x) - at0
            }))
        }
    }
}

/// Circle chart datum (mean-zero trig polynomial).
pub fn parse_chart_1d(spec: &str, grid: PeriodicGrid) -> Result<PeriodicField, Failure> {
    match spec {
        "zero" => Ok(PeriodicField::zeros(grid)),
        _ => {
            let coeffs = parse_trig(spec)?;
            Ok(PeriodicField::from_fn(grid, |x| trig_eval(&coeffs, x)))
        }
    }
}

/// Torus velocity presets for dim >= 2.
pub fn parse_velocity_nd(spec: &str, grid: TorusGrid) -> Result<TorusVectorField, Failure> {
    let gradient_part = |grid: TorusGrid| -> Result<TorusVectorField, Failure> {
        let a = nd_sine_cos(grid);
        Ok(a.inv_laplace_mean_zero()?.scaled(-1.0).gradient()?)
    };
    let swirl_part = |grid: TorusGrid| -> Result<TorusVectorField, Failure> {
        let psi = TorusField::from_fn(grid, |x| {
            0.05 * (TAU * x[0]).sin() * (TAU * x[1]).sin()
        });
        let gp = psi.gradient()?;
        let mut comps = vec![gp.component(1).scaled(-1.0), gp.component(0).clone()];
        for _ in 2..grid.dim() {
            comps.push(TorusField::zeros(grid));
        }
        Ok(TorusVectorField::new(comps)?)
    };
    match spec {
        "zero" => Ok(TorusVectorField::zeros(grid)),
        "grad-sine" => gradient_part(grid),
        "swirl" => swirl_part(grid),
        "grad-sine+swirl" => Ok(gradient_part(grid)?.axpy(1.0, &swirl_part(grid)?)),
        other => Err(Failure::Config(format!(
            "unknown initial data `{other}` for dim >= 2; use zero, grad-sine, \
             swirl, or grad-sine+swirl"
        ))),
    }
}

/// Torus chart presets for the alpha = 1 closed form in dim >= 2.
pub fn parse_chart_nd(spec: &str, grid: TorusGrid) -> Result<TorusField, Failure> {
    match spec {
        "zero" => Ok(TorusField::zeros(grid)),
        "nd-sine-cos" => Ok(nd_sine_cos(grid)),
        other => Err(Failure::Config(format!(
            "chart preset `{other}` is not available for dim >= 2; \
             use zero or nd-sine-cos"
        ))),
    }
}

/// Mean-zero potential 0.3 (sin 2 pi x1 + cos 2 pi x2 [+ sin 2 pi x3]).
fn nd_sine_cos(grid: TorusGrid) -> TorusField {
    TorusField::from_fn(grid, |x| {
        let mut v = 0.3 * (TAU * x[0]).sin();
        if x.len() > 1 {
            v += 0.3 * (TAU * x[1]).cos();
        }
        if x.len() > 2 {
            v += 0.3 * (TAU * x[2]).sin();
        }
        v
    })
}
