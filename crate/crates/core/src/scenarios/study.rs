use super::manufactured::ManufacturedCase;
use crate::bem::{boundary_l2_error, SpaceKind};
use crate::coupled::{solve_reduction_to_boundary, SolutionTrace, SolverOptions};
use crate::cq::TimeGrid;
use crate::fem::{h1_seminorm_error, l2_error, FemSystem};
use crate::mesh::{extract_boundary, generate_square_mesh};
use crate::{Error, Point, Result};
use std::cell::RefCell;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

/// Default observation points for the exterior error.
pub const OBSERVATION_POINTS: [Point; 5] = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [1.0, 1.0]];

pub const CSV_HEADER: &str =
    "level,n_fem,n_bem,m,e_u_l2,ecr_u_l2,e_u_h1,ecr_u_h1,e_lambda,ecr_lambda,e_phi,ecr_phi,e_obs,ecr_obs";

/// Errors of a computed trace against the manufactured solution at one time.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorMetrics {
    /// `‖u − u_h‖_{L²(Ω₋)}`.
    pub e_u_l2: f64,
    /// `‖u − u_h‖_{H¹(Ω₋)}` (full norm).
    pub e_u_h1: f64,
    /// `‖λ − λ_h‖_{L²(Γ)}`.
    pub e_lambda: f64,
    /// `‖φ − φ_h‖_{L²(Γ)}`.
    pub e_phi: f64,
    /// `max_j |u₊(x_j) − u*_h(x_j)|`.
    pub e_obs: f64,
}

impl ErrorMetrics {
    pub fn as_array(&self) -> [f64; 5] {
        [self.e_u_l2, self.e_u_h1, self.e_lambda, self.e_phi, self.e_obs]
    }
}

fn step_index(grid: &TimeGrid, t: f64) -> Result<usize> {
    let x = t / grid.k();
    let n = x.round();
    if (x - n).abs() > 1e-8 || n < 0.0 || n as usize > grid.n_steps() {
        return Err(Error::InvalidInput(format!("t = {t} is not a point of the time grid")));
    }
    Ok(n as usize)
}

/// All five error quantities at time `t`, which must be a grid point.
pub fn error_metrics(
    fem: &FemSystem,
    grid: &TimeGrid,
    trace: &SolutionTrace,
    case: &ManufacturedCase,
    points: &[Point],
    t: f64,
) -> Result<ErrorMetrics> {
    let n = step_index(grid, t)?;
    if trace.u.len() <= n || trace.exterior.len() <= n {
        return Err(Error::InvalidInput("trace is shorter than the requested time".into()));
    }
    let u = &trace.u[n];
    let e_u_l2 = l2_error(&fem.mesh, &fem.dofs, u, |x| case.interior(x, t));
    let semi = h1_seminorm_error(&fem.mesh, &fem.dofs, u, |x| case.interior_grad(x, t));
    let b = &fem.bmesh;
    let failure = RefCell::new(None);
    let guard = |r: Result<f64>| {
        r.unwrap_or_else(|e| {
            failure.borrow_mut().get_or_insert(e);
            0.0
        })
    };
    let e_lambda = boundary_l2_error(b, &fem.spaces, SpaceKind::X, &trace.lambda[n], |p, x| {
        guard(case.lambda(x, b.normal(p), t))
    });
    let e_phi = boundary_l2_error(b, &fem.spaces, SpaceKind::Y, &trace.phi[n], |_, x| guard(case.phi(x, t)));
    let mut e_obs: f64 = 0.0;
    for (j, &x) in points.iter().enumerate() {
        let v = trace.exterior[n].get(j).copied().ok_or_else(|| {
            Error::InvalidInput("trace has fewer observation values than points".into())
        })?;
        e_obs = e_obs.max((case.exterior(x, t)? - v).abs());
    }
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(ErrorMetrics {
        e_u_l2,
        e_u_h1: e_u_l2.hypot(semi),
        e_lambda,
        e_phi,
        e_obs,
    })
}

/// One level of a convergence study.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelRecord {
    pub level: u32,
    pub n_fem: usize,
    pub n_bem: usize,
    pub m: usize,
    pub metrics: ErrorMetrics,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<LevelRecord>,
}

impl ConvergenceReport {
    /// `log₂(E_{i−1}/E_i)` for every metric, `None` on the first row.
    pub fn rates(&self, i: usize) -> Option<[f64; 5]> {
        if i == 0 || i >= self.rows.len() {
            return None;
        }
        let (a, b) = (self.rows[i - 1].metrics.as_array(), self.rows[i].metrics.as_array());
        Some(std::array::from_fn(|j| (a[j] / b[j]).log2()))
    }

    /// Rates between the last two levels.
    pub fn last_rates(&self) -> Option<[f64; 5]> {
        self.rates(self.rows.len().checked_sub(1)?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for (i, r) in self.rows.iter().enumerate() {
            let e = r.metrics.as_array();
            let rates = self.rates(i);
            let _ = write!(out, "{},{},{},{}", r.level, r.n_fem, r.n_bem, r.m);
            for j in 0..5 {
                match rates {
                    Some(c) => {
                        let _ = write!(out, ",{:.6e},{:.4}", e[j], c[j]);
                    }
                    None => {
                        let _ = write!(out, ",{:.6e},", e[j]);
                    }
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct StudyOptions {
    pub solver: SolverOptions,
    pub observation_points: Vec<Point>,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            solver: SolverOptions::default(),
            observation_points: OBSERVATION_POINTS.to_vec(),
        }
    }
}

/// Runs the manufactured case on uniformly refined squares `0..levels`
/// with `steps0 · 2^level` time steps to `t_final`, solving by reduction to
/// the boundary, and reports errors at `t_final`.
pub fn convergence_study(
    case: &ManufacturedCase,
    levels: u32,
    degree: usize,
    t_final: f64,
    steps0: usize,
    opts: &StudyOptions,
) -> Result<ConvergenceReport> {
    if levels < 2 {
        return Err(Error::InvalidInput(format!("a convergence study needs at least 2 levels, got {levels}")));
    }
    if steps0 == 0 || !(t_final > 0.0) {
        return Err(Error::InvalidInput("final time and base step count must be positive".into()));
    }
    let mut rows = Vec::new();
    for level in 0..levels {
        let mesh = generate_square_mesh(level);
        let bmesh = extract_boundary(&mesh)?;
        let fem = Arc::new(FemSystem::assemble(&mesh, &bmesh, &case.coefficients(), degree)?);
        let m = steps0 << level;
        let grid = TimeGrid::from_final_time(t_final, m)?;
        let problem = case.problem(fem.clone(), grid, opts.observation_points.clone(), opts.solver.exec)?;
        let trace = solve_reduction_to_boundary(&problem, &opts.solver)?;
        let metrics = error_metrics(&fem, &grid, &trace, case, &opts.observation_points, grid.final_time())?;
        rows.push(LevelRecord {
            level,
            n_fem: mesh.n_triangles(),
            n_bem: bmesh.n_panels(),
            m,
            metrics,
        });
    }
    Ok(ConvergenceReport { rows })
}
