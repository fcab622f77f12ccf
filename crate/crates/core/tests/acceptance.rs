//! Acceptance criteria. Each test prints one `criterion N PASS|FAIL` line
//! with the measured quantities, then asserts.
//!
//! Run with `cargo test -p wavecouple --test acceptance -- --nocapture`.

use nalgebra::{DMatrix, DVector};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};
use wavecouple::bem::{
    assemble_block, assemble_k, assemble_v, assemble_vk_between, assemble_w, evaluate_potentials, fundamental_solution,
    project_boundary_data, BoundarySpaces, SpaceKind,
};
use wavecouple::coupled::{
    assemble_bh, solve_marching, solve_reduction_to_boundary, DoubleLayerSign, InteriorStepper, SolverOptions,
};
use wavecouple::cq::{all_steps_at_once, cq_weights, scalar_samples, Contour, Scalar, TimeGrid};
use wavecouple::fem::{ConstantCoefficients, FemSystem};
use wavecouple::linalg::EnvelopeLdlt;
use wavecouple::mesh::{extract_boundary, generate_square_mesh, BoundaryMesh};
use wavecouple::parallel::Execution;
use wavecouple::quadrature::Rule1d;
use wavecouple::scenarios::{
    convergence_study, manufactured_case_1, plane_wave_incident, CausalSignal, ManufacturedKappa, PlaneWave, StudyOptions,
};
use wavecouple::C64;

// Runtime limits are wall-clock; keep the criteria from competing for cores.
static SERIAL: Mutex<()> = Mutex::new(());

fn verdict(n: u32, name: &str, pass: bool, detail: &str) {
    println!("criterion {n} {}: {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} ({name}) failed: {detail}");
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn square_fem(level: u32, coeff: &ConstantCoefficients) -> FemSystem {
    let mesh = generate_square_mesh(level);
    let bmesh = extract_boundary(&mesh).unwrap();
    FemSystem::assemble(&mesh, &bmesh, coeff, 1).unwrap()
}

fn square_boundary(level: u32) -> BoundaryMesh {
    extract_boundary(&generate_square_mesh(level)).unwrap()
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn rates(errs: &[f64]) -> Vec<f64> {
    errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[test]
fn criterion_1_cq_weight_oracles() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let grid = TimeGrid::new(0.1, 128).unwrap();
    let k = grid.k();
    let contour = Contour::for_weights(&grid);
    let exec = Execution::default();
    let inv = cq_weights(&Scalar::real(|s: C64| 1.0 / s), &grid, &contour, exec).unwrap();
    let der = cq_weights(&Scalar::real(|s: C64| s), &grid, &contour, exec).unwrap();
    let elapsed = start.elapsed();
    let rel = |w: C64, exact: f64| (w - exact).norm() / exact.abs();
    let e_inv = (0..inv.len())
        .map(|m| rel(inv.scalar(m), if m == 0 { k / 2.0 } else { k }))
        .fold(0.0, f64::max);
    let e_der = (0..der.len())
        .map(|m| {
            let exact = if m == 0 { 2.0 / k } else { 4.0 / k * if m % 2 == 0 { 1.0 } else { -1.0 } };
            rel(der.scalar(m), exact)
        })
        .fold(0.0, f64::max);
    let pass = e_inv < 1e-10 && e_der < 1e-10 && elapsed < Duration::from_secs(1);
    verdict(
        1,
        "CQ weights of 1/s and s",
        pass,
        &format!("max rel err 1/s {e_inv:.2e}, s {e_der:.2e} (tol 1e-10), {elapsed:.2?} (limit 1 s)"),
    );
}

#[test]
fn criterion_2_cq_second_order() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    // g = sin(t)χ(t); the exact y(t) = ∫₀ᵗ e^{τ−t} g(τ) dτ by composite Gauss.
    let g = CausalSignal::RampedSine { omega: 1.0, ramp: 0.5 };
    let rule = Rule1d::gauss(20);
    let exact = |t: f64| -> f64 {
        let pieces = 200;
        let h = t / pieces as f64;
        (0..pieces)
            .map(|i| {
                rule.points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&x, &w)| {
                        let tau = (i as f64 + x) * h;
                        w * h * (tau - t).exp() * g.value(tau)
                    })
                    .sum::<f64>()
            })
            .sum()
    };
    let t_final = 4.0;
    let errs: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&k| {
            let grid = TimeGrid::from_final_time(t_final, (t_final / k).round() as usize).unwrap();
            let data: Vec<f64> = grid.times().iter().map(|&t| g.value(t)).collect();
            let sol = all_steps_at_once(
                &Scalar::real(|s: C64| s + 1.0),
                &grid,
                &Contour::for_all_steps(&grid),
                &scalar_samples(&data),
                Execution::default(),
            )
            .unwrap();
            grid.times()
                .iter()
                .zip(&sol.samples)
                .map(|(&t, v)| (v[0].re - exact(t)).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let r = rates(&errs);
    let pass = r.iter().all(|x| (x - 2.0).abs() <= 0.1);
    verdict(
        2,
        "CQ order for y' + y = g",
        pass,
        &format!("max errors {}, rates {r:.4?} (target 2.0 ± 0.1)", sci(&errs)),
    );
}

#[test]
fn criterion_3_marching_matches_reduction() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let case = manufactured_case_1(ManufacturedKappa::Polynomial);
    let mesh = generate_square_mesh(0);
    let bmesh = extract_boundary(&mesh).unwrap();
    let fem = Arc::new(FemSystem::assemble(&mesh, &bmesh, &case.coefficients(), 1).unwrap());
    let grid = TimeGrid::from_final_time(3.0, 40).unwrap();
    let opts = SolverOptions::default();
    let problem = case.problem(fem, grid, vec![[1.0, 1.0], [-1.0, 0.0]], opts.exec).unwrap();
    let a = solve_marching(&problem, &opts).unwrap();
    let b = solve_reduction_to_boundary(&problem, &opts).unwrap();
    let elapsed = start.elapsed();
    let d = a.relative_difference(&b);
    let worst = d.iter().copied().fold(0.0, f64::max);
    let pass = worst < 1e-8 && elapsed < Duration::from_secs(60);
    verdict(
        3,
        "marching vs reduction to the boundary",
        pass,
        &format!("rel max diff (u, λ, φ, exterior) {} (tol 1e-8), {elapsed:.2?} (limit 60 s)", sci(&d)),
    );
}

#[test]
fn criterion_4_point_source_single_layer() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let s = c(2.0, 3.0);
    let x_obs = [1.5, 0.5];
    let exact = fundamental_solution(f64::hypot(x_obs[0], x_obs[1]), s).unwrap();
    let mut errs = Vec::new();
    let mut panels = Vec::new();
    for level in 0..3 {
        let b = square_boundary(level);
        let sp = BoundarySpaces::new(&b, 1).unwrap();
        let v = assemble_v(&b, &sp, s).unwrap();
        let trace = |part: fn(C64) -> f64| {
            project_boundary_data(&b, &sp, |_, x| part(fundamental_solution(x[0].hypot(x[1]), s).unwrap()), SpaceKind::X)
                .unwrap()
        };
        let (gre, gim) = (trace(|z| z.re), trace(|z| z.im));
        let m = sp.gram(&b, SpaceKind::X, SpaceKind::X);
        let (mr, mi) = (m.mul_vec(&gre), m.mul_vec(&gim));
        let rhs = DVector::from_fn(sp.dim_x(), |i, _| c(mr[i], mi[i]));
        let lambda: Vec<C64> = v.lu().solve(&rhs).unwrap().iter().copied().collect();
        let phi = vec![c(0.0, 0.0); sp.dim_y()];
        // The potential evaluates D φ − S λ, so the single layer is its negative.
        let u = evaluate_potentials(&b, &sp, s, &lambda, &phi, &[x_obs], Default::default()).unwrap();
        errs.push((-u[0] - exact).norm() / exact.norm());
        panels.push(b.n_panels());
    }
    let r = rates(&errs);
    let pass = r.iter().all(|&x| x >= 2.0) && errs[2] < 1e-3;
    verdict(
        4,
        "point-source single layer at s = 2 + 3i",
        pass,
        &format!("panels {panels:?}, rel errors {}, rates {r:.3?} (need ≥ 2, final < 1e-3)", sci(&errs)),
    );
}

#[test]
fn criterion_5_convergence_ladder() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let case = manufactured_case_1(ManufacturedKappa::Polynomial);
    let report = convergence_study(&case, 4, 1, 3.0, 20, &StudyOptions::default()).unwrap();
    let elapsed = start.elapsed();
    print!("{}", report.to_csv());
    let r = report.last_rates().unwrap();
    let checks = [
        ("E^u_L2", r[0], (r[0] - 2.0).abs() <= 0.3, "2.0 ± 0.3"),
        ("E^u_H1", r[1], (r[1] - 1.0).abs() <= 0.2, "1.0 ± 0.2"),
        ("E^λ", r[2], r[2] >= 1.2, "≥ 1.2"),
        ("E^φ", r[3], (r[3] - 2.0).abs() <= 0.3, "2.0 ± 0.3"),
        ("E^obs", r[4], (r[4] - 2.0).abs() <= 0.5, "2.0 ± 0.5"),
    ];
    let pass = checks.iter().all(|c| c.2);
    let detail: Vec<String> = checks
        .iter()
        .map(|(n, v, ok, want)| format!("{n} {v:.4} ({want}{})", if *ok { "" } else { ", out of range" }))
        .collect();
    verdict(
        5,
        "last-level rates of the p = 1 ladder",
        pass,
        &format!("{}; {elapsed:.1?}", detail.join(", ")),
    );
}

#[test]
fn criterion_6_stepper_energy() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let fem = square_fem(2, &ConstantCoefficients::diagonal(1.5, 0.75));
    let st = InteriorStepper::new(&fem, 0.05).unwrap();
    let n = fem.n_dofs();
    let mut u2: Vec<f64> = (0..n).map(|i| ((i * 7919) % 101) as f64 / 101.0 - 0.5).collect();
    let mut u1: Vec<f64> = u2.iter().enumerate().map(|(i, x)| x * (1.0 - 0.01 * (i % 5) as f64)).collect();
    let e0 = st.energy(&u1, &u2);
    let zero = vec![0.0; n];
    let mut drift: f64 = 0.0;
    for _ in 0..200 {
        let u = st.step(&u1, &u2, &zero);
        u2 = std::mem::replace(&mut u1, u);
        drift = drift.max(((st.energy(&u1, &u2) - e0) / e0).abs());
    }
    verdict(
        6,
        "energy of the unforced interior stepper",
        drift < 1e-10,
        &format!("max relative drift over 200 steps {drift:.2e} (tol 1e-10)"),
    );
}

#[test]
fn criterion_7_long_time_stability() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let fem = Arc::new(square_fem(1, &ConstantCoefficients::diagonal(0.25, 0.125)));
    let direction = [1.0, 0.0];
    let signal = CausalSignal::Pulse { omega: 2.0, ramp: 0.5, duration: 2.0 };
    let wave = plane_wave_incident(direction, signal, PlaneWave::min_delay(direction, &fem.bmesh)).unwrap();
    let grid = TimeGrid::from_final_time(50.0, 1000).unwrap();
    let opts = SolverOptions::default();
    let problem = wave.problem(fem.clone(), grid, vec![[2.0, 0.5]], opts.exec).unwrap();
    let trace = solve_reduction_to_boundary(&problem, &opts).unwrap();
    let norms: Vec<f64> = trace.u.iter().map(|u| fem.mass.quadratic_form(u).max(0.0).sqrt()).collect();
    let finite = trace
        .u
        .iter()
        .chain(&trace.lambda)
        .chain(&trace.phi)
        .chain(&trace.exterior)
        .flatten()
        .all(|x| x.is_finite());
    let half = grid.n_steps() / 2;
    let first = norms[..=half].iter().copied().fold(0.0, f64::max);
    let second = norms[half + 1..].iter().copied().fold(0.0, f64::max);
    let pass = finite && second <= 1.05 * first;
    verdict(
        7,
        "long-time stability to T = 50",
        pass,
        &format!(
            "max M-norm first half {first:.4e}, second half {second:.4e} (ratio {:.3e}, limit 1.05), finite {finite}, {:.1?}",
            second / first,
            start.elapsed()
        ),
    );
}

/// `‖(¼I − K̂²)g − V̂Ŵg‖_M` on `Y_h`, the operators represented through the
/// `Y_h` Gram matrix, for the interpolant of a smooth `g`.
fn calderon_defect(level: u32, s: C64) -> f64 {
    let b = square_boundary(level);
    let sp = BoundarySpaces::new(&b, 1).unwrap();
    let (v, k) = assemble_vk_between(&b, &sp, s, SpaceKind::Y, SpaceKind::Y).unwrap();
    let w = assemble_w(&b, &sp, s).unwrap();
    let m = sp.gram(&b, SpaceKind::Y, SpaceKind::Y);
    let f = EnvelopeLdlt::new(&m).unwrap();
    let minv = |x: &DVector<C64>| -> DVector<C64> {
        let re = f.solve(&x.iter().map(|z| z.re).collect::<Vec<_>>());
        let im = f.solve(&x.iter().map(|z| z.im).collect::<Vec<_>>());
        DVector::from_fn(x.len(), |i, _| c(re[i], im[i]))
    };
    let g = DVector::from_iterator(sp.dim_y(), b.node_coords().iter().map(|x| c((2.0 * x[0]).cos() + x[1] * x[1], 0.0)));
    let kkg = minv(&(&k * minv(&(&k * &g))));
    let vwg = minv(&(&v * minv(&(&w * &g))));
    let d = g * c(0.25, 0.0) - kkg - vwg;
    let (dr, di): (Vec<f64>, Vec<f64>) = d.iter().map(|z| (z.re, z.im)).unzip();
    (m.quadratic_form(&dr) + m.quadratic_form(&di)).sqrt()
}

#[test]
fn criterion_8_structural_invariants() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let exec = Execution::default();
    let s = c(1.0, 2.0);

    // V and W complex symmetric.
    let b1 = square_boundary(1);
    let sp1 = BoundarySpaces::new(&b1, 1).unwrap();
    let block = assemble_block(&b1, &sp1, s, exec).unwrap();
    let sym_v = max_abs(&(&block.v - block.v.transpose())) / max_abs(&block.v);
    let sym_w = max_abs(&(&block.w - block.w.transpose())) / max_abs(&block.w);
    let sym_ok = sym_v < 1e-12 && sym_w < 1e-12;

    // B − Bᵀ: the diagonal blocks vanish and the off-diagonal blocks carry
    // only identity and double-layer parts.
    let fem = square_fem(1, &ConstantCoefficients::diagonal(1.5, 0.75));
    let (nx, ny) = (fem.dim_x(), fem.dim_y());
    let bh = assemble_bh(&fem, s, DoubleLayerSign::Minus, exec).unwrap();
    let d = &bh - bh.transpose();
    let scale = max_abs(&bh);
    let ih = fem.ih.to_dense().map(|x| c(x, 0.0));
    let k = assemble_k(&fem.bmesh, &fem.spaces, s).unwrap();
    let tr = d.view((0, nx), (nx, ny)).into_owned();
    let diag_defect = max_abs(&d.view((0, 0), (nx, nx)).into_owned()).max(max_abs(&d.view((nx, nx), (ny, ny)).into_owned())) / scale;
    let skew_defect = max_abs(&(&tr + d.view((nx, 0), (ny, nx)).transpose())) / scale;
    let literal_defect = max_abs(&(&tr + &ih)) / scale;
    let derived_defect = max_abs(&(&tr + &ih + &k * c(2.0, 0.0))) / scale;
    let literal_ok = diag_defect < 1e-10 && skew_defect < 1e-10 && literal_defect < 1e-10;

    // Γ restricted to boundary dofs is I_h, bitwise.
    let mut gamma_ok = true;
    for p in [1, 2] {
        let coeff = ConstantCoefficients::unit();
        let f = square_fem(1, &coeff);
        let f = if p == 1 {
            f
        } else {
            FemSystem::assemble(&f.mesh, &f.bmesh, &coeff, 2).unwrap()
        };
        let g = f.gamma.to_dense();
        let ih = f.ih.to_dense();
        let mut on_boundary = vec![false; f.n_dofs()];
        for (j, &col) in f.y_to_u.iter().enumerate() {
            on_boundary[col] = true;
            gamma_ok &= g.column(col) == ih.column(j);
        }
        for (col, &b) in on_boundary.iter().enumerate() {
            if !b {
                gamma_ok &= g.column(col).iter().all(|&x| x == 0.0);
            }
        }
    }

    // Calderón defect over three refinements.
    let cal: Vec<f64> = (0..4).map(|l| calderon_defect(l, s)).collect();
    let cal_ok = cal.windows(2).all(|w| w[1] < w[0]);
    let elapsed = start.elapsed();

    let pass = sym_ok && literal_ok && gamma_ok && cal_ok && elapsed < Duration::from_secs(300);
    verdict(
        8,
        "structural invariants",
        pass,
        &format!(
            "V/W symmetry {sym_v:.1e}/{sym_w:.1e} ({}); B − Bᵀ diagonal blocks {diag_defect:.1e}, skew {skew_defect:.1e}, \
             top-right vs −I_h {literal_defect:.2e} ({}), vs −I_h − 2K {derived_defect:.1e}; \
             Γ = I_h on boundary dofs p = 1, 2 ({}); Calderón defects {} ({}); {elapsed:.1?}",
            if sym_ok { "ok" } else { "fail" },
            if literal_ok { "ok" } else { "fail" },
            if gamma_ok { "ok" } else { "fail" },
            sci(&cal),
            if cal_ok { "ok" } else { "fail" },
        ),
    );
}
