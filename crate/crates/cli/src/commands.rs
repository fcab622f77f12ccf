use crate::config::{Coefficients, ConfigError, RunConfig};
use crate::output;
use anyhow::{bail, Context, Result};
use log::info;
use std::path::Path;
use std::sync::Arc;
use wavecouple::coupled::{postprocess_exterior, solve_reduction_to_boundary, ScatteringProblem, SolverOptions};
use wavecouple::cq::{Contour, TimeGrid};
use wavecouple::fem::FemSystem;
use wavecouple::mesh::{extract_boundary, signed_area, BoundaryMesh, Mesh};
use wavecouple::parallel::Execution;
use wavecouple::scenarios::{convergence_study, manufactured_case_1, ManufacturedKappa, StudyOptions, CSV_HEADER};
use wavecouple::Point;

/// One rate check of a convergence report.
pub struct RateCheck {
    pub name: &'static str,
    pub rate: f64,
    pub target: String,
    pub pass: bool,
}

/// Last-level rates against their targets. Degree `p` gives `min(p + 1, 2)`
/// for the `L²`-type errors (the time discretization caps them at 2) and
/// `min(p, 2)` for `H¹`.
pub fn rate_checks(p: usize, rates: [f64; 5]) -> Vec<RateCheck> {
    let l2 = (p + 1).min(2) as f64;
    let h1 = p.min(2) as f64;
    let band = |name, rate: f64, want: f64, tol: f64| RateCheck {
        name,
        rate,
        target: format!("{want} ± {tol}"),
        pass: (rate - want).abs() <= tol,
    };
    vec![
        band("e_u_l2", rates[0], l2, 0.3),
        band("e_u_h1", rates[1], h1, 0.2),
        RateCheck {
            name: "e_lambda",
            rate: rates[2],
            target: "≥ 1.2".into(),
            pass: rates[2] >= 1.2,
        },
        band("e_phi", rates[3], l2, 0.3),
        band("e_obs", rates[4], l2, 0.5),
    ]
}

fn write_resolved(cfg: &RunConfig, out: &Path) -> Result<()> {
    let mut echo = cfg.clone();
    echo.output = out.to_path_buf();
    let path = out.join("resolved_config.toml");
    std::fs::write(&path, echo.to_toml()).with_context(|| format!("writing {}", path.display()))
}

fn solver_options(cfg: &RunConfig, grid: &TimeGrid, exec: Execution) -> Result<SolverOptions> {
    let contour = cfg.contour_radius.map(|r| Contour::with_radius(grid, r)).transpose()?;
    Ok(SolverOptions {
        exec,
        contour,
        ..Default::default()
    })
}

fn manufactured_kappa(cfg: &RunConfig) -> ManufacturedKappa {
    match cfg.coefficients() {
        Coefficients::Unit => ManufacturedKappa::Identity,
        _ => ManufacturedKappa::Polynomial,
    }
}

/// Runs the manufactured convergence ladder, writes `convergence.csv` and
/// returns whether the last-level rates meet their targets.
pub fn converge(cfg: &RunConfig, out: &Path, exec: Execution) -> Result<bool> {
    if !cfg.manufactured {
        return Err(ConfigError("converge needs `manufactured = true`".into()).into());
    }
    if cfg.contour_radius.is_some() {
        return Err(ConfigError("invalid `contour_radius`: the step count changes with the level, so converge uses the default contours".into()).into());
    }
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_resolved(cfg, out)?;
    let case = manufactured_case_1(manufactured_kappa(cfg));
    let opts = StudyOptions {
        solver: SolverOptions {
            exec,
            ..Default::default()
        },
        observation_points: cfg.observation_points.clone(),
    };
    info!("convergence study: p = {}, {} levels, T = {}, M0 = {}", cfg.p, cfg.levels, cfg.t_final(), cfg.steps());
    let report = convergence_study(&case, cfg.levels, cfg.p, cfg.t_final(), cfg.steps(), &opts)?;
    let path = out.join("convergence.csv");
    report.write_csv(&path)?;
    println!("{CSV_HEADER}");
    print!("{}", report.to_csv().lines().skip(1).map(|l| format!("{l}\n")).collect::<String>());
    let rates = report.last_rates().context("report has fewer than two levels")?;
    let checks = rate_checks(cfg.p, rates);
    for c in &checks {
        println!("{:9} rate {:7.4}  target {:9}  {}", c.name, c.rate, c.target, if c.pass { "PASS" } else { "FAIL" });
    }
    info!("wrote {}", path.display());
    Ok(checks.iter().all(|c| c.pass))
}

fn inside_mesh(mesh: &Mesh, x: Point) -> bool {
    (0..mesh.n_triangles()).any(|t| {
        let [a, b, c] = mesh.triangle_points(t);
        let (s0, s1, s2) = (signed_area(a, b, x), signed_area(b, c, x), signed_area(c, a, x));
        (s0 >= 0.0 && s1 >= 0.0 && s2 >= 0.0) || (s0 <= 0.0 && s1 <= 0.0 && s2 <= 0.0)
    })
}

/// Sample points where the exterior field can be evaluated: outside the
/// obstacle and at least one panel length from the boundary.
fn evaluable(mesh: &Mesh, bmesh: &BoundaryMesh, x: Point) -> bool {
    let (d, p) = bmesh.distance(x);
    d > bmesh.length(p) && !inside_mesh(mesh, x)
}

/// Solves by reduction to the boundary and writes traces, observation
/// series and snapshots.
pub fn simulate(cfg: &RunConfig, out: &Path, exec: Execution) -> Result<()> {
    let mut cfg = cfg.clone();
    if cfg.incident.is_none() && !cfg.manufactured {
        return Err(ConfigError("simulate needs an [incident] table or `manufactured = true`".into()).into());
    }
    let mesh = cfg.geometry.mesh()?;
    cfg.resolve_delay(&mesh)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_resolved(&cfg, out)?;

    let bmesh = extract_boundary(&mesh)?;
    let field = cfg.coefficients().field();
    let fem = Arc::new(FemSystem::assemble(&mesh, &bmesh, &*field, cfg.p)?);
    let grid = TimeGrid::from_final_time(cfg.t_final(), cfg.steps())?;
    let opts = solver_options(&cfg, &grid, exec)?;
    let points = cfg.observation_points.clone();
    let problem: ScatteringProblem = match &cfg.incident {
        Some(inc) => inc.wave()?.problem(fem.clone(), grid, points.clone(), exec)?,
        None => manufactured_case_1(manufactured_kappa(&cfg)).problem(fem.clone(), grid, points.clone(), exec)?,
    };
    info!(
        "simulate: {} triangles, {} panels, {} FEM dofs, N = {}, k = {:.4e}",
        mesh.n_triangles(),
        bmesh.n_panels(),
        fem.n_dofs(),
        grid.n_steps(),
        grid.k()
    );
    let trace = solve_reduction_to_boundary(&problem, &opts)?;
    let finite = trace.u.iter().chain(&trace.lambda).chain(&trace.phi).chain(&trace.exterior).flatten().all(|v| v.is_finite());
    if !finite {
        bail!("the solution contains non-finite values");
    }
    info!("{} frequency solves, discarded imaginary residue {:.2e}", trace.frequency_solves, trace.imaginary_residue);

    output::write_boundary_traces(&out.join("boundary_traces.csv"), &grid, &trace.lambda, &trace.phi)?;
    output::write_observations(&out.join("observations.csv"), &grid, &trace.exterior)?;
    output::write_points(&out.join("observation_points.csv"), &points)?;

    if cfg.snapshot_times.is_empty() {
        return Ok(());
    }
    let exterior_grid = match &cfg.sampling {
        Some(s) => {
            let all = s.points();
            let valid: Vec<bool> = all.iter().map(|&x| evaluable(&mesh, &bmesh, x)).collect();
            let mut sampled = problem.clone();
            sampled.observation_points = all.iter().zip(&valid).filter(|(_, &v)| v).map(|(&x, _)| x).collect();
            info!("exterior snapshots: {} of {} sample points evaluable", sampled.observation_points.len(), all.len());
            let values = postprocess_exterior(&sampled, &trace.lambda, &trace.phi, &opts)?;
            Some((s, valid, values))
        }
        None => None,
    };
    for (i, &t) in cfg.snapshot_times.iter().enumerate() {
        let n = (t / grid.k()).round() as usize;
        let title = format!("t = {:.6}", grid.t(n));
        output::write_vtk_interior(&out.join(format!("interior_{i:04}.vtk")), &mesh, &trace.u[n], &title)?;
        if let Some((s, valid, values)) = &exterior_grid {
            let mut it = values[n].iter();
            let full: Vec<f64> = valid.iter().map(|&v| if v { *it.next().unwrap() } else { 0.0 }).collect();
            output::write_vtk_exterior(&out.join(format!("exterior_{i:04}.vtk")), s, &full, valid, &title)?;
        }
    }
    info!("wrote {} snapshot(s) to {}", cfg.snapshot_times.len(), out.display());
    Ok(())
}
