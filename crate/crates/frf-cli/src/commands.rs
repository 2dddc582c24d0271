//! Command implementations: thin wrappers over the library with
//! deterministic CSV/JSON artifacts and the exit-code discipline.

use serde::Serialize;

use frf_core::{
    alpha0_density_geodesic, alpha1_solution, alpha_divergence, alpham1_solution, conserved_c,
    hellinger_distance, integrate_nd, integrate_pj, Alpha1SolutionNd, AlphaParam, Density,
    ParametricFamily, PeriodicField, PeriodicGrid, TorusGrid,
};

use crate::output::{
    cell, to_json_pretty, write_file, BreakdownInfo, ConfigEcho, CsvWriter, JsonTrajectory,
    Sidecar,
};
use crate::spec::{
    parse_chart_1d, parse_chart_nd, parse_density, parse_velocity_1d, parse_velocity_nd,
};
use crate::{
    thread_cap, CliResult, DivergenceArgs, Failure, FisherRaoArgs, Format, GeodesicArgs, Method,
    Suite, ValidateArgs,
};

#[derive(Serialize)]
struct DivergenceEntry {
    alpha: f64,
    value: f64,
}

#[derive(Serialize)]
struct DivergenceReport<'a> {
    schema: u32,
    n: usize,
    from: &'a str,
    to: &'a str,
    divergences: Vec<DivergenceEntry>,
    hellinger: f64,
}

pub fn cmd_divergence(args: &DivergenceArgs) -> CliResult {
    let grid = PeriodicGrid::new(args.n)?;
    let from = parse_density(&args.from, grid)?;
    let to = parse_density(&args.to, grid)?;
    let mut divergences = Vec::with_capacity(args.alphas.len());
    for &a in &args.alphas {
        let value = alpha_divergence(&from, &to, AlphaParam::new(a)?)?;
        println!("D^({a})({} || {}) = {}", args.from, args.to, cell(value));
        divergences.push(DivergenceEntry { alpha: a, value });
    }
    let hellinger = hellinger_distance(&from, &to)?;
    println!("Hellinger distance = {}", cell(hellinger));
    if let Some(out) = &args.out {
        let report = DivergenceReport {
            schema: 1,
            n: args.n,
            from: &args.from,
            to: &args.to,
            divergences,
            hellinger,
        };
        write_file(out, &to_json_pretty(&report)?)?;
    }
    Ok(())
}

/// Everything a geodesic run produces before serialization.
struct TrajectoryArtifact {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
    conserved_c: Option<Vec<[f64; 2]>>,
    breakdown: Option<BreakdownInfo>,
    closed_form_max_diff: Option<f64>,
}

pub fn cmd_geodesic(args: &GeodesicArgs) -> CliResult {
    if args.stride == 0 {
        return Err(Failure::Config("--stride must be >= 1".into()));
    }
    if !(args.dim >= 1 && args.dim <= 3) {
        return Err(Failure::Config(format!(
            "--dim must be 1, 2, or 3, got {}",
            args.dim
        )));
    }
    let artifact = if args.dim == 1 {
        geodesic_1d(args)?
    } else {
        geodesic_nd(args)?
    };
    let breakdown_time = artifact.breakdown.as_ref().map(|b| b.time);
    let echo = ConfigEcho {
        command: "geodesic".into(),
        n: args.n,
        dim: args.dim,
        alpha: args.alpha,
        t_final: args.t_final,
        dt: args.dt,
        method: args.method,
        init: args.init.clone(),
        chart_a: args.chart_a.clone(),
        chart_b: args.chart_b.clone(),
        stride: args.stride,
        format: args.format,
        out: args.out.clone(),
    };
    match args.format {
        Format::Csv => {
            let mut csv = CsvWriter::new(
                &artifact.columns.iter().map(String::as_str).collect::<Vec<_>>(),
            );
            for row in &artifact.rows {
                csv.row(row);
            }
            write_file(&args.out, &csv.finish())?;
            let sidecar = Sidecar {
                schema: 1,
                config: echo,
                conserved_c: artifact.conserved_c,
                breakdown: artifact.breakdown,
                closed_form_max_diff: artifact.closed_form_max_diff,
            };
            write_file(&format!("{}.json", args.out), &to_json_pretty(&sidecar)?)?;
        }
        Format::Json => {
            let combined = JsonTrajectory {
                schema: 1,
                config: &echo,
                conserved_c: &artifact.conserved_c,
                breakdown: &artifact.breakdown,
                closed_form_max_diff: &artifact.closed_form_max_diff,
                columns: artifact.columns,
                rows: artifact.rows,
            };
            write_file(&args.out, &to_json_pretty(&combined)?)?;
        }
    }
    if let Some(b) = breakdown_time {
        println!("breakdown reported at t = {}", cell(b));
    }
    Ok(())
}

fn geodesic_1d(args: &GeodesicArgs) -> Result<TrajectoryArtifact, Failure> {
    let grid = PeriodicGrid::new(args.n)?;
    let ap = AlphaParam::new(args.alpha)?;
    match args.method {
        Method::Pde => {
            let u0 = parse_velocity_1d(&args.init, grid)?;
            let traj = integrate_pj(&u0, ap, args.t_final, args.dt)?;
            let (columns, rows) = velocity_table_1d(grid, traj.times(), traj.fields(), args.stride)?;
            let conserved = conserved_series(ap, traj.times(), traj.fields(), args.stride)?;
            Ok(TrajectoryArtifact {
                columns,
                rows,
                conserved_c: Some(conserved),
                breakdown: traj.breakdown().map(|time| BreakdownInfo { time }),
                closed_form_max_diff: None,
            })
        }
        Method::ClosedForm if args.alpha == 1.0 => {
            let a = parse_chart_1d(&args.chart_a, grid)?;
            let b = parse_chart_1d(&args.chart_b, grid)?;
            let steps = steps_for(args.t_final, args.dt)?;
            let mut times = Vec::with_capacity(steps + 1);
            let mut fields = Vec::with_capacity(steps + 1);
            for k in 0..=steps {
                let t = k as f64 * args.dt;
                let (_, u) = alpha1_solution(&a, &b, t)?;
                times.push(t);
                fields.push(u);
            }
            let pde = integrate_pj(&fields[0], ap, args.t_final, args.dt)?;
            let diff = max_field_diff(&fields, pde.fields());
            let (columns, rows) = velocity_table_1d(grid, &times, &fields, args.stride)?;
            let conserved = conserved_series(ap, &times, &fields, args.stride)?;
            Ok(TrajectoryArtifact {
                columns,
                rows,
                conserved_c: Some(conserved),
                breakdown: None,
                closed_form_max_diff: Some(diff),
            })
        }
        Method::ClosedForm if args.alpha == -1.0 => {
            let u0 = parse_velocity_1d(&args.init, grid)?;
            let steps = steps_for(args.t_final, args.dt)?;
            let mut times = Vec::new();
            let mut fields = Vec::new();
            let mut breakdown = None;
            for k in 0..=steps {
                let t = k as f64 * args.dt;
                match alpham1_solution(&u0, t) {
                    Ok((_, u)) => {
                        times.push(t);
                        fields.push(u);
                    }
                    Err(frf_core::Error::Breakdown(t_star)) => {
                        breakdown = Some(BreakdownInfo { time: t_star });
                        break;
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            let pde = integrate_pj(&u0, ap, args.t_final, args.dt)?;
            let diff = max_field_diff(&fields, pde.fields());
            let (columns, rows) = velocity_table_1d(grid, &times, &fields, args.stride)?;
            let conserved = conserved_series(ap, &times, &fields, args.stride)?;
            Ok(TrajectoryArtifact {
                columns,
                rows,
                conserved_c: Some(conserved),
                breakdown,
                closed_form_max_diff: Some(diff),
            })
        }
        Method::ClosedForm if args.alpha == 0.0 => {
            // The integrable alpha = 0 object is the density path: run the
            // flow, then emit the great-circle interpolation between its
            // endpoints, reparametrized by spherical arclength. The sidecar
            // records the deviation of the flow densities from that circle.
            let u0 = parse_velocity_1d(&args.init, grid)?;
            let traj = integrate_pj(&u0, ap, args.t_final, args.dt)?;
            let flow = traj.flow(args.dt)?;
            let rho0 = Density::uniform(grid);
            let rho_end = flow.diffeos.last().unwrap().jacobian()?;
            let total = hellinger_distance(&rho0, &rho_end)?;
            let columns = vec!["t".to_string(), "x".to_string(), "rho".to_string()];
            let mut rows = Vec::new();
            let mut diff = 0.0f64;
            for k in (0..flow.times.len()).step_by(args.stride) {
                let rho_t = flow.diffeos[k].jacobian()?;
                let tau = if total > 0.0 {
                    hellinger_distance(&rho0, &rho_t)? / total
                } else {
                    0.0
                };
                let circle = alpha0_density_geodesic(&rho0, &rho_end, tau)?;
                diff = diff.max(
                    rho_t
                        .as_field()
                        .zip(circle.as_field(), |p, q| p - q)
                        .linf(),
                );
                for (j, x) in grid.nodes().enumerate() {
                    rows.push(vec![flow.times[k], x, circle.as_field().values()[j]]);
                }
            }
            let conserved = conserved_series(ap, traj.times(), traj.fields(), args.stride)?;
            Ok(TrajectoryArtifact {
                columns,
                rows,
                conserved_c: Some(conserved),
                breakdown: traj.breakdown().map(|time| BreakdownInfo { time }),
                closed_form_max_diff: Some(diff),
            })
        }
        Method::ClosedForm => Err(Failure::Config(format!(
            "closed form is available at alpha in {{-1, 0, 1}}, got {}",
            args.alpha
        ))),
    }
}

fn geodesic_nd(args: &GeodesicArgs) -> Result<TrajectoryArtifact, Failure> {
    let grid = TorusGrid::new(args.dim, args.n)?;
    let ap = AlphaParam::new(args.alpha)?;
    match args.method {
        Method::Pde => {
            let u0 = parse_velocity_nd(&args.init, grid)?;
            let traj = integrate_nd(&u0, ap, args.t_final, args.dt)?;
            let mut columns = vec!["t".to_string()];
            for i in 1..=args.dim {
                columns.push(format!("x{i}"));
            }
            for i in 1..=args.dim {
                columns.push(format!("u{i}"));
            }
            columns.push("div_u".to_string());
            let mut rows = Vec::new();
            for k in (0..traj.times().len()).step_by(args.stride) {
                let u = &traj.velocities()[k];
                let div = u.div()?;
                for idx in 0..grid.len() {
                    let mut row = Vec::with_capacity(2 * args.dim + 2);
                    row.push(traj.times()[k]);
                    row.extend(node_coords(idx, args.dim, args.n));
                    for c in 0..args.dim {
                        row.push(u.component(c).values()[idx]);
                    }
                    row.push(div.values()[idx]);
                    rows.push(row);
                }
            }
            Ok(TrajectoryArtifact {
                columns,
                rows,
                conserved_c: None,
                breakdown: traj.breakdown().map(|time| BreakdownInfo { time }),
                closed_form_max_diff: None,
            })
        }
        Method::ClosedForm if args.alpha == 1.0 => {
            // The n-dimensional closed form lives in Lagrangian (label)
            // coordinates: emit the Jacobian density and the chart value
            // along each label.
            let a = parse_chart_nd(&args.chart_a, grid)?;
            let b = parse_chart_nd(&args.chart_b, grid)?;
            let sol = Alpha1SolutionNd::new(a, b)?;
            let steps = steps_for(args.t_final, args.dt)?;
            let mut columns = vec!["t".to_string()];
            for i in 1..=args.dim {
                columns.push(format!("a{i}"));
            }
            columns.push("jac".to_string());
            columns.push("phi".to_string());
            let mut rows = Vec::new();
            for k in (0..=steps).step_by(args.stride) {
                let t = k as f64 * args.dt;
                let jac = sol.jacobian(t)?;
                let phi = sol.phi_lagrangian(t);
                for idx in 0..grid.len() {
                    let mut row = Vec::with_capacity(args.dim + 3);
                    row.push(t);
                    row.extend(node_coords(idx, args.dim, args.n));
                    row.push(jac.as_field().values()[idx]);
                    row.push(phi.values()[idx]);
                    rows.push(row);
                }
            }
            Ok(TrajectoryArtifact {
                columns,
                rows,
                conserved_c: None,
                breakdown: None,
                closed_form_max_diff: None,
            })
        }
        Method::ClosedForm => Err(Failure::Config(format!(
            "closed form with --dim >= 2 is available at alpha = 1, got {}",
            args.alpha
        ))),
    }
}

fn steps_for(t_final: f64, dt: f64) -> Result<usize, Failure> {
    if !(t_final > 0.0 && dt > 0.0 && t_final / dt <= 1e7) {
        return Err(Failure::Config(format!(
            "need t_final > 0 and dt > 0 with a sane step count, got \
             t_final = {t_final}, dt = {dt}"
        )));
    }
    Ok((t_final / dt).round().max(1.0) as usize)
}

fn node_coords(idx: usize, dim: usize, m: usize) -> Vec<f64> {
    let mut rest = idx;
    let mut digits = vec![0usize; dim];
    for a in (0..dim).rev() {
        digits[a] = rest % m;
        rest /= m;
    }
    digits.iter().map(|&j| j as f64 / m as f64).collect()
}

fn velocity_table_1d(
    grid: PeriodicGrid,
    times: &[f64],
    fields: &[PeriodicField],
    stride: usize,
) -> Result<(Vec<String>, Vec<Vec<f64>>), Failure> {
    let columns = vec![
        "t".to_string(),
        "x".to_string(),
        "u".to_string(),
        "div_u".to_string(),
    ];
    let mut rows = Vec::new();
    for k in (0..times.len()).step_by(stride) {
        let ux = fields[k].derivative()?;
        for (j, x) in grid.nodes().enumerate() {
            rows.push(vec![times[k], x, fields[k].values()[j], ux.values()[j]]);
        }
    }
    Ok((columns, rows))
}

fn conserved_series(
    alpha: AlphaParam,
    times: &[f64],
    fields: &[PeriodicField],
    stride: usize,
) -> Result<Vec<[f64; 2]>, Failure> {
    let mut series = Vec::new();
    for k in (0..times.len()).step_by(stride) {
        series.push([times[k], conserved_c(&fields[k], alpha)?]);
    }
    Ok(series)
}

fn max_field_diff(a: &[PeriodicField], b: &[PeriodicField]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| p.zip(q, |x, y| x - y).linf())
        .fold(0.0, f64::max)
}

#[derive(Serialize)]
struct FisherRaoReport<'a> {
    schema: u32,
    n: usize,
    family: &'a str,
    theta: &'a [f64],
    step: f64,
    matrix: Vec<Vec<f64>>,
    /// The quarter matrix, i.e. the value taken by the lifted metric.
    quarter_matrix: Vec<Vec<f64>>,
}

pub fn cmd_fisher_rao(args: &FisherRaoArgs) -> CliResult {
    let grid = PeriodicGrid::new(args.n)?;
    let (dim, eval): (usize, Box<dyn Fn(&[f64]) -> frf_core::Result<Density> + Sync>) =
        match args.family.as_str() {
            "cosine" => (
                1,
                Box::new(move |th: &[f64]| {
                    Density::new(PeriodicField::from_fn(grid, |x| {
                        1.0 + th[0] * (std::f64::consts::TAU * x).cos()
                    }))
                }),
            ),
            "cos-sin" => (
                2,
                Box::new(move |th: &[f64]| {
                    Density::new(PeriodicField::from_fn(grid, |x| {
                        1.0 + th[0] * (std::f64::consts::TAU * x).cos()
                            + th[1] * (std::f64::consts::TAU * x).sin()
                    }))
                }),
            ),
            other => {
                return Err(Failure::Config(format!(
                    "unknown family `{other}`; use cosine or cos-sin"
                )))
            }
        };
    let theta = if args.thetas.is_empty() {
        vec![0.0; dim]
    } else if args.thetas.len() == dim {
        args.thetas.clone()
    } else {
        return Err(Failure::Config(format!(
            "family `{}` has {dim} parameter(s), got {} --theta value(s)",
            args.family,
            args.thetas.len()
        )));
    };
    let family = ParametricFamily::new(dim, args.step, eval)?;
    let matrix = frf_core::fisher_rao_matrix(&family, &theta)?;
    for row in &matrix {
        println!(
            "{}",
            row.iter().map(|&v| cell(v)).collect::<Vec<_>>().join("  ")
        );
    }
    if let Some(out) = &args.out {
        let quarter_matrix = matrix
            .iter()
            .map(|row| row.iter().map(|&v| 0.25 * v).collect())
            .collect();
        let report = FisherRaoReport {
            schema: 1,
            n: args.n,
            family: &args.family,
            theta: &theta,
            step: args.step,
            matrix: matrix.clone(),
            quarter_matrix,
        };
        write_file(out, &to_json_pretty(&report)?)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ValidateReport {
    schema: u32,
    suite: String,
    checks: Vec<crate::suites::Check>,
    pass: bool,
}

pub fn cmd_validate(args: &ValidateArgs) -> CliResult {
    let cap = thread_cap()?;
    let list = crate::suites::suite_list(args.suite);
    let checks = crate::suites::run_suites(&list, args.n, cap)?;
    let pass = checks.iter().all(|c| c.pass);
    let suite_name = match args.suite {
        Suite::Calculus => "calculus",
        Suite::Group => "group",
        Suite::Divergence => "divergence",
        Suite::Duality => "duality",
        Suite::Geodesic1d => "geodesic-1d",
        Suite::TorusNd => "torus-nd",
        Suite::All => "all",
    };
    let report = ValidateReport {
        schema: 1,
        suite: suite_name.to_string(),
        checks,
        pass,
    };
    let json = to_json_pretty(&report)?;
    print!("{json}");
    if let Some(out) = &args.out {
        write_file(out, &json)?;
    }
    if pass {
        Ok(())
    } else {
        Err(Failure::Internal(
            "validation suite reported failing checks".into(),
        ))
    }
}
