//! Quick oracle checks of the numerical kernels: scalar CQ weights and
//! solvers, Bessel functions, Gauss rules and BEM quadrature.

use nalgebra::DVector;
use std::f64::consts::PI;
use wavecouple::bem::{assemble_block, assemble_v, evaluate_potentials, fundamental_solution, project_boundary_data, BoundarySpaces, SpaceKind};
use wavecouple::cq::{all_steps_at_once, cq_weights, scalar_samples, solve_convolution_equation_marching, Contour, Scalar, TimeGrid};
use wavecouple::mesh::{extract_boundary, generate_square_mesh, BoundaryMesh};
use wavecouple::parallel::Execution;
use wavecouple::quadrature::Rule1d;
use wavecouple::scenarios::CausalSignal;
use wavecouple::special::bessel_k01;
use wavecouple::C64;

/// Relative perturbation applied by fault injection to checks with an
/// absolute tolerance: far above every tolerance below.
const INJECTED: f64 = 1e-6;

pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

pub struct Report {
    pub results: Vec<CheckResult>,
}

impl Report {
    pub fn passed(&self) -> usize {
        self.results.iter().filter(|r| r.pass).count()
    }

    pub fn all_passed(&self) -> bool {
        self.passed() == self.results.len()
    }

    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.results.iter().find(|r| !r.pass)
    }

    pub fn table(&self) -> String {
        let width = self.results.iter().map(|r| r.name.len()).max().unwrap_or(0);
        let mut out = String::new();
        for r in &self.results {
            out += &format!("{:width$}  {}  {}\n", r.name, if r.pass { "PASS" } else { "FAIL" }, r.detail);
        }
        out += &format!("PASS {}/{}\n", self.passed(), self.results.len());
        out
    }
}

/// A check gets `true` when a fault is to be injected into it.
type Check = fn(bool) -> (bool, String);

/// Names of all checks, in run order.
pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|(n, _)| *n).collect()
}

const CHECKS: [(&str, Check); 9] = [
    ("cq_weights:1/s", weights_inverse),
    ("cq_weights:s", weights_derivative),
    ("cq_all_steps:marching", all_steps_vs_marching),
    ("cq_order:ode", ode_order),
    ("special:k0_k1", bessel_values),
    ("quadrature:gauss", gauss_exactness),
    ("bem_quadrature:self_entry", self_entry),
    ("bem_quadrature:symmetry", block_symmetry),
    ("bem_quadrature:point_source", point_source),
];

/// Runs every check. `inject` names a check whose computed quantity is
/// perturbed before comparison, to exercise the failure path.
pub fn run(inject: Option<&str>) -> Report {
    let results = CHECKS
        .iter()
        .map(|&(name, f)| {
            let (pass, detail) = f(inject == Some(name));
            CheckResult { name, pass, detail }
        })
        .collect();
    Report { results }
}

fn square(level: u32) -> BoundaryMesh {
    extract_boundary(&generate_square_mesh(level)).expect("square boundary")
}

fn weights_inverse(inject: bool) -> (bool, String) {
    let eps = if inject { INJECTED } else { 0.0 };
    let grid = TimeGrid::new(0.1, 128).unwrap();
    let w = cq_weights(&Scalar::real(|s: C64| 1.0 / s), &grid, &Contour::for_weights(&grid), Execution::default()).unwrap();
    let k = grid.k();
    let err = (0..w.len())
        .map(|m| {
            let exact = if m == 0 { k / 2.0 } else { k };
            let got = w.scalar(m) + if m == 1 { eps * k } else { 0.0 };
            (got - exact).norm() / exact
        })
        .fold(0.0, f64::max);
    (err < 1e-10, format!("max rel err {err:.2e}"))
}

fn weights_derivative(inject: bool) -> (bool, String) {
    let eps = if inject { INJECTED } else { 0.0 };
    let grid = TimeGrid::new(0.1, 128).unwrap();
    let w = cq_weights(&Scalar::real(|s: C64| s), &grid, &Contour::for_weights(&grid), Execution::default()).unwrap();
    let k = grid.k();
    let err = (0..w.len())
        .map(|m| {
            let exact = if m == 0 { 2.0 / k } else { 4.0 / k * if m % 2 == 0 { 1.0 } else { -1.0 } };
            let got = w.scalar(m) + if m == 1 { eps / k } else { 0.0 };
            (got - exact).norm() / exact.abs()
        })
        .fold(0.0, f64::max);
    (err < 1e-10, format!("max rel err {err:.2e}"))
}

fn all_steps_vs_marching(inject: bool) -> (bool, String) {
    let eps = if inject { INJECTED } else { 0.0 };
    let grid = TimeGrid::new(0.05, 64).unwrap();
    let f = Scalar::real(|s: C64| (s + 1.0) / (s + 2.0));
    let g: Vec<f64> = grid.times().iter().map(|&t| CausalSignal::interior_default().value(t)).collect();
    let g = scalar_samples(&g);
    let a = all_steps_at_once(&f, &grid, &Contour::for_all_steps(&grid), &g, Execution::default()).unwrap();
    let b = solve_convolution_equation_marching(&f, &grid, &Contour::for_weights(&grid), &g).unwrap();
    let scale = b.iter().map(|v| v[0].norm()).fold(0.0, f64::max);
    let err = a
        .samples
        .iter()
        .zip(&b)
        .map(|(x, y)| (x[0] - y[0]).norm())
        .fold(0.0, f64::max)
        / scale
        + eps;
    (err < 1e-8, format!("rel diff {err:.2e}"))
}

fn ode_order(inject: bool) -> (bool, String) {
    // Injection shifts the operator, which destroys convergence.
    let shift = if inject { 0.01 } else { 0.0 };
    // y' + y = g with g = sin(t)χ(t); y by composite Gauss on Duhamel's formula.
    let g = CausalSignal::RampedSine { omega: 1.0, ramp: 0.5 };
    let rule = Rule1d::gauss(20);
    let exact = |t: f64| -> f64 {
        let pieces = 100;
        let h = t / pieces as f64;
        (0..pieces)
            .flat_map(|i| rule.points.iter().zip(&rule.weights).map(move |(&x, &w)| (i as f64 + x, w)))
            .map(|(x, w)| {
                let tau = x * h;
                w * h * (tau - t).exp() * g.value(tau)
            })
            .sum()
    };
    let errs: Vec<f64> = [0.1, 0.05]
        .iter()
        .map(|&k| {
            let grid = TimeGrid::from_final_time(4.0, (4.0 / k) as usize).unwrap();
            let data: Vec<f64> = grid.times().iter().map(|&t| g.value(t)).collect();
            let y = all_steps_at_once(
                &Scalar::real(move |s: C64| s + 1.0 + shift),
                &grid,
                &Contour::for_all_steps(&grid),
                &scalar_samples(&data),
                Execution::default(),
            )
            .unwrap();
            grid.times()
                .iter()
                .zip(&y.samples)
                .map(|(&t, v)| (v[0].re - exact(t)).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let rate = (errs[0] / errs[1]).log2();
    ((rate - 2.0).abs() <= 0.1, format!("rate {rate:.4}"))
}

fn bessel_values(inject: bool) -> (bool, String) {
    let eps = if inject { INJECTED } else { 0.0 };
    let (k0, k1) = bessel_k01(C64::new(1.0, 0.0));
    let err = ((k0.re + eps - 0.421_024_438_240_708_3) / 0.421_024_438_240_708_3)
        .abs()
        .max(((k1.re - 0.601_907_230_197_234_6) / 0.601_907_230_197_234_6).abs());
    (err < 1e-13, format!("rel err {err:.2e} at z = 1"))
}

fn gauss_exactness(inject: bool) -> (bool, String) {
    let eps = if inject { INJECTED } else { 0.0 };
    let r = Rule1d::gauss(10);
    let got: f64 = r.points.iter().zip(&r.weights).map(|(&x, &w)| w * x.powi(19)).sum::<f64>() + eps;
    let err = (got - 1.0 / 20.0).abs() * 20.0;
    (err < 1e-13, format!("∫t¹⁹ rel err {err:.2e}"))
}

fn self_entry(inject: bool) -> (bool, String) {
    let eps = if inject { INJECTED } else { 0.0 };
    // For small real s, V_pp → h²(3/2 − ln h − ln(s/2) − γ)/(2π).
    let b = square(0);
    let sp = BoundarySpaces::new(&b, 1).unwrap();
    let s = 1e-4;
    let v = assemble_v(&b, &sp, C64::new(s, 0.0)).unwrap();
    let h = b.length(0);
    let gamma = 0.577_215_664_901_532_9;
    let exact = (h * h * (1.5 - h.ln()) - h * h * ((s / 2.0).ln() + gamma)) / (2.0 * PI);
    let err = ((v[(0, 0)].re + eps * exact - exact) / exact).abs();
    (err < 1e-9, format!("rel err {err:.2e}"))
}

fn block_symmetry(inject: bool) -> (bool, String) {
    let eps = if inject { INJECTED } else { 0.0 };
    let b = square(0);
    let sp = BoundarySpaces::new(&b, 1).unwrap();
    let blk = assemble_block(&b, &sp, C64::new(1.0, 2.0), Execution::default()).unwrap();
    let defect = |m: &nalgebra::DMatrix<C64>| {
        let scale = m.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        (m - m.transpose()).iter().fold(0.0f64, |a, z| a.max(z.norm())) / scale
    };
    let d = defect(&blk.v).max(defect(&blk.w)) + eps;
    (d < 1e-12, format!("V/W symmetry defect {d:.2e}"))
}

fn point_source(inject: bool) -> (bool, String) {
    // Injection scales the density on the finer mesh by 1 + 1e-2.
    let scale = if inject { 1.01 } else { 1.0 };
    let s = C64::new(2.0, 3.0);
    let x_obs = [1.5, 0.5];
    let exact = fundamental_solution(f64::hypot(x_obs[0], x_obs[1]), s).unwrap();
    let errs: Vec<f64> = (0..2)
        .map(|level| {
            let b = square(level);
            let sp = BoundarySpaces::new(&b, 1).unwrap();
            let v = assemble_v(&b, &sp, s).unwrap();
            let part = |f: fn(C64) -> f64| {
                project_boundary_data(&b, &sp, |_, x| f(fundamental_solution(x[0].hypot(x[1]), s).unwrap()), SpaceKind::X).unwrap()
            };
            let m = sp.gram(&b, SpaceKind::X, SpaceKind::X);
            let (mr, mi) = (m.mul_vec(&part(|z| z.re)), m.mul_vec(&part(|z| z.im)));
            let rhs = DVector::from_fn(sp.dim_x(), |i, _| C64::new(mr[i], mi[i]));
            let factor = if level == 1 { scale } else { 1.0 };
            let lambda: Vec<C64> = v.lu().solve(&rhs).unwrap().iter().map(|z| z * factor).collect();
            let phi = vec![C64::new(0.0, 0.0); sp.dim_y()];
            let u = evaluate_potentials(&b, &sp, s, &lambda, &phi, &[x_obs], Default::default()).unwrap();
            (-u[0] - exact).norm() / exact.norm()
        })
        .collect();
    let rate = (errs[0] / errs[1]).log2();
    (rate >= 2.0, format!("errors {:.2e}, {:.2e}, rate {rate:.2}", errs[0], errs[1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique() {
        let mut n = check_names();
        n.sort();
        n.dedup();
        assert_eq!(n.len(), CHECKS.len());
    }

    #[test]
    fn injection_fails_exactly_the_named_check() {
        for (name, f) in CHECKS {
            let (clean, faulty) = (f(false), f(true));
            assert!(clean.0, "{name} fails without injection: {}", clean.1);
            assert!(!faulty.0, "{name} passes despite injection: {}", faulty.1);
        }
    }
}
