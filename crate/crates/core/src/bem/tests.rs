use super::pairs::{classify, pair_nodes, PairKind, PairRules};
use super::*;
use crate::linalg::EnvelopeLdlt;
use crate::mesh::{extract_boundary, generate_square_mesh, BoundaryMesh};
use crate::parallel::Execution;
use crate::quadrature::Rule1d;
use crate::{Point, C64};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

fn square(level: u32) -> BoundaryMesh {
    extract_boundary(&generate_square_mesh(level)).unwrap()
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[test]
fn blocks_are_complex_symmetric() {
    let b = square(0);
    for p in 1..=2 {
        let sp = BoundarySpaces::new(&b, p).unwrap();
        let blk = assemble_block(&b, &sp, c(1.3, 4.0), Execution::Parallel).unwrap();
        assert!(max_abs(&(&blk.v - blk.v.transpose())) < 1e-12 * max_abs(&blk.v));
        assert!(max_abs(&(&blk.w - blk.w.transpose())) < 1e-12 * max_abs(&blk.w));
        assert_eq!(blk.k.shape(), (sp.dim_x(), sp.dim_y()));
        assert_eq!(blk.kt(), blk.k.transpose());
    }
}

#[test]
fn conjugate_frequency_gives_conjugate_block() {
    let b = square(0);
    let sp = BoundarySpaces::new(&b, 2).unwrap();
    let s = c(0.7, -9.0);
    let a = assemble_block(&b, &sp, s, Execution::Parallel).unwrap();
    let z = assemble_block(&b, &sp, s.conj(), Execution::Parallel).unwrap();
    for (x, y) in [(&a.v, &z.v), (&a.k, &z.k), (&a.w, &z.w)] {
        assert!(max_abs(&(x.map(|v| v.conj()) - y)) < 1e-12 * max_abs(x));
    }
}

#[test]
fn sequential_and_parallel_assembly_agree_exactly() {
    let b = square(0);
    let sp = BoundarySpaces::new(&b, 1).unwrap();
    let a = assemble_block(&b, &sp, c(2.0, 1.0), Execution::Parallel).unwrap();
    let z = assemble_block(&b, &sp, c(2.0, 1.0), Execution::Sequential).unwrap();
    assert_eq!(a.v, z.v);
    assert_eq!(a.k, z.k);
    assert_eq!(a.w, z.w);
}

#[test]
fn rejects_frequencies_off_the_right_half_plane() {
    let b = square(0);
    let sp = BoundarySpaces::new(&b, 1).unwrap();
    assert!(assemble_v(&b, &sp, c(0.0, 1.0)).is_err());
    assert!(assemble_w(&b, &sp, c(-1.0, 0.0)).is_err());
}

#[test]
fn self_entry_small_frequency_limit() {
    let b = square(0);
    let sp = BoundarySpaces::new(&b, 1).unwrap();
    let s = 1e-4;
    let v = assemble_v(&b, &sp, c(s, 0.0)).unwrap();
    let h: f64 = 0.25;
    let euler = 0.577_215_664_901_532_9;
    let exact = (h * h * (1.5 - h.ln()) - h * h * ((s / 2.0).ln() + euler)) / (2.0 * PI);
    for p in 0..b.n_panels() {
        let e = v[(p, p)];
        assert!((e.re - exact).abs() < 1e-9 * exact, "{} vs {exact}", e.re);
        assert!(e.im.abs() < 1e-15);
    }
}

/// Brute-force tensor Gauss oracle for a well-separated pair.
fn oracle(b: &BoundaryMesh, p: usize, q: usize, f: impl Fn(Point, Point, f64, f64) -> C64) -> C64 {
    let r = Rule1d::gauss(20);
    let mut acc = c(0.0, 0.0);
    for (&t, &wt) in r.points.iter().zip(&r.weights) {
        for (&u, &wu) in r.points.iter().zip(&r.weights) {
            acc += f(b.point_at(p, t), b.point_at(q, u), t, u) * (wt * wu * b.length(p) * b.length(q));
        }
    }
    acc
}

fn phi(x: Point, y: Point, s: C64) -> (C64, C64, [f64; 2], f64) {
    let d = [y[0] - x[0], y[1] - x[1]];
    let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
    let (g, dg) = kernel::kernel_and_derivative(r, s);
    (g, dg, d, r)
}

#[test]
fn separated_entries_match_brute_force_quadrature() {
    let b = square(0);
    let sp = BoundarySpaces::new(&b, 1).unwrap();
    let s = c(1.0, 3.0);
    let blk = assemble_block(&b, &sp, s, Execution::Parallel).unwrap();
    // Panel 0 lies on one side; panels on the opposite side are far.
    let far: Vec<usize> = (0..b.n_panels())
        .filter(|&q| classify(&b, 0, q) == PairKind::Far)
        .collect();
    assert!(!far.is_empty());
    for &q in &far {
        let o = oracle(&b, 0, q, |x, y, _, _| phi(x, y, s).0);
        assert!((blk.v[(0, q)] - o).norm() < 1e-12 * o.norm(), "V[0,{q}]");
    }
    // K[0, j] for a node j whose two panels are both far from panel 0.
    for j in 0..sp.dim_y() {
        let adj: Vec<usize> = (0..b.n_panels()).filter(|&q| b.panels()[q].contains(&j)).collect();
        if !adj.iter().all(|q| far.contains(q)) {
            continue;
        }
        let mut o = c(0.0, 0.0);
        for &q in &adj {
            let nu = b.normal(q);
            let start = b.panels()[q][0] == j;
            o += oracle(&b, 0, q, |x, y, _, u| {
                let (_, dg, d, r) = phi(x, y, s);
                let psi = if start { 1.0 - u } else { u };
                dg * ((d[0] * nu[0] + d[1] * nu[1]) / r) * psi
            });
        }
        assert!((blk.k[(0, j)] - o).norm() < 1e-12 * o.norm().max(1e-3), "K[0,{j}]");
    }
}

#[test]
fn colinear_double_layer_entries_vanish() {
    let b = square(1);
    let rules = PairRules::new(1);
    let s = c(2.0, 5.0);
    let mut checked = 0;
    for p in 0..b.n_panels() {
        for q in 0..b.n_panels() {
            let (tp, tq) = (b.tangent(p), b.tangent(q));
            let (a, _) = b.endpoints(p);
            let (cq, _) = b.endpoints(q);
            let cross = |u: [f64; 2], v: [f64; 2]| u[0] * v[1] - u[1] * v[0];
            if cross(tp, tq).abs() < 1e-14 && cross(tp, [cq[0] - a[0], cq[1] - a[1]]).abs() < 1e-14 {
                let n = pair_nodes(&b, p, q, s, &rules);
                assert!(n.kq.iter().chain(&n.kp).all(|z| z.norm() < 1e-13));
                checked += 1;
            }
        }
    }
    assert!(checked > b.n_panels());
    // Globally: a panel in the middle of a side against interior nodes of the same side.
    let sp = BoundarySpaces::new(&b, 1).unwrap();
    let k = assemble_k(&b, &sp, s).unwrap();
    let [n0, n1] = b.panels()[3];
    assert!(k[(3, n0)].norm() < 1e-13 && k[(3, n1)].norm() < 1e-13);
}

#[test]
fn hypersingular_form_is_coercive_for_real_frequency() {
    let b = square(0);
    for p in 1..=2 {
        let sp = BoundarySpaces::new(&b, p).unwrap();
        let w = assemble_w(&b, &sp, c(2.0, 0.0)).unwrap();
        let ones = DVector::from_element(sp.dim_y(), c(1.0, 0.0));
        if p == 1 {
            assert!((&w * &ones).norm() > 1e-3);
        }
        let mut seed = 12345u64;
        for _ in 0..20 {
            let phi = DVector::from_fn(sp.dim_y(), |_, _| {
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                c((seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5, 0.0)
            });
            let q = (phi.transpose() * &w * &phi)[(0, 0)];
            assert!(q.re > 0.0);
        }
    }
}

#[test]
fn hypersingular_matches_normal_derivative_of_double_layer() {
    let b = square(0);
    let sp = BoundarySpaces::new(&b, 1).unwrap();
    let s = c(1.5, 2.0);
    let w = assemble_w(&b, &sp, s).unwrap();
    // Node i at the middle of the bottom side, node j on the top side.
    let coords = b.node_coords();
    let find = |x: Point| (0..coords.len()).find(|&k| (coords[k][0] - x[0]).abs() + (coords[k][1] - x[1]).abs() < 1e-12).unwrap();
    let i = find([0.0, -0.5]);
    let j = find([0.0, 0.5]);
    let rule = Rule1d::gauss(16);
    let delta = 1e-4;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for p in (0..b.n_panels()).filter(|&p| b.panels()[p].contains(&i)) {
        let start = b.panels()[p][0] == i;
        let nu = b.normal(p);
        for (&t, &wt) in rule.points.iter().zip(&rule.weights) {
            let x = b.point_at(p, t);
            points.push([x[0] + delta * nu[0], x[1] + delta * nu[1]]);
            points.push([x[0] - delta * nu[0], x[1] - delta * nu[1]]);
            weights.push(wt * b.length(p) * if start { 1.0 - t } else { t });
        }
    }
    let opts = PotentialOptions { allow_near: true, ..Default::default() };
    let pm = potential_matrices(&b, &sp, s, &points, opts).unwrap();
    let mut fd = c(0.0, 0.0);
    for (k, wt) in weights.iter().enumerate() {
        let dn = (pm.double[(2 * k, j)] - pm.double[(2 * k + 1, j)]) / (2.0 * delta);
        fd -= dn * *wt;
    }
    let rel = (w[(i, j)] - fd).norm() / fd.norm();
    assert!(rel < 1e-4, "W = {}, fd = {fd}, rel {rel}", w[(i, j)]);
}

#[test]
fn potentials_vanish_for_zero_densities_and_refuse_near_points() {
    let b = square(0);
    let sp = BoundarySpaces::new(&b, 1).unwrap();
    let s = c(1.0, 1.0);
    let zl = vec![c(0.0, 0.0); sp.dim_x()];
    let zp = vec![c(0.0, 0.0); sp.dim_y()];
    let v = evaluate_potentials(&b, &sp, s, &zl, &zp, &[[1.0, 1.0]], Default::default()).unwrap();
    assert_eq!(v[0], c(0.0, 0.0));
    let near = evaluate_potentials(&b, &sp, s, &zl, &zp, &[[0.6, 0.0]], Default::default());
    assert!(matches!(near, Err(crate::Error::NearField { .. })));
    let on = PotentialOptions { allow_near: true, ..Default::default() };
    assert!(evaluate_potentials(&b, &sp, s, &zl, &zp, &[[0.5, 0.1]], on).is_err());
}

#[test]
fn double_layer_jump_relation() {
    let b = square(0);
    let sp = BoundarySpaces::new(&b, 1).unwrap();
    let s = c(1.0, 2.0);
    // Exact in Y_h along the bottom side, so the jump is f itself.
    let f = |x: Point| x[0] * x[1] + 0.5 * x[1] + 1.0;
    let phi: Vec<C64> = b.node_coords().iter().map(|x| c(f(*x), 0.0)).collect();
    let lambda = vec![c(0.0, 0.0); sp.dim_x()];
    // A point inside a bottom panel.
    let x0 = [0.1, -0.5];
    let nu = [0.0, -1.0];
    let opts = PotentialOptions { allow_near: true, ..Default::default() };
    let mut errs = Vec::new();
    for eps in [1e-2, 1e-3, 1e-4] {
        let pts = [[x0[0] + eps * nu[0], x0[1] + eps * nu[1]], [x0[0] - eps * nu[0], x0[1] - eps * nu[1]]];
        let v = evaluate_potentials(&b, &sp, s, &lambda, &phi, &pts, opts).unwrap();
        errs.push((v[0] - v[1] - f(x0)).norm());
    }
    for (k, w) in errs.windows(2).enumerate() {
        assert!(w[1] < 0.2 * w[0] || w[1] < 1e-10, "step {k}: {errs:?}");
    }
    assert!(errs[2] < 1e-3, "{errs:?}");
}

/// `‖(¼I − K̂²) g − V̂Ŵ g‖_M` for the `Y_h` interpolant of a smooth `g`, with
/// all operators represented on `Y_h` through the `Y_h` Gram matrix.
fn calderon_defect(level: u32, s: C64) -> f64 {
    let b = square(level);
    let sp = BoundarySpaces::new(&b, 1).unwrap();
    let (v, k) = assemble_vk_between(&b, &sp, s, SpaceKind::Y, SpaceKind::Y).unwrap();
    let w = assemble_w(&b, &sp, s).unwrap();
    let m = sp.gram(&b, SpaceKind::Y, SpaceKind::Y);
    let minv = |x: &DVector<C64>| -> DVector<C64> {
        let f = EnvelopeLdlt::new(&m).unwrap();
        let re: Vec<f64> = x.iter().map(|z| z.re).collect();
        let im: Vec<f64> = x.iter().map(|z| z.im).collect();
        let (re, im) = (f.solve(&re), f.solve(&im));
        DVector::from_fn(x.len(), |i, _| c(re[i], im[i]))
    };
    let g = DVector::from_iterator(
        sp.dim_y(),
        b.node_coords().iter().map(|x| c((2.0 * x[0]).cos() + x[1] * x[1], 0.0)),
    );
    let kg = minv(&(&k * &g));
    let kkg = minv(&(&k * &kg));
    let vwg = minv(&(&v * minv(&(&w * &g))));
    let d = g * c(0.25, 0.0) - kkg - vwg;
    let (dr, di): (Vec<f64>, Vec<f64>) = d.iter().map(|z| (z.re, z.im)).unzip();
    let (mr, mi) = (m.mul_vec(&dr), m.mul_vec(&di));
    let acc: f64 = (0..d.len()).map(|i| dr[i] * mr[i] + di[i] * mi[i]).sum();
    acc.sqrt()
}

#[test]
fn calderon_defect_decreases_under_refinement() {
    let s = c(1.0, 2.0);
    let d: Vec<f64> = (0..3).map(|l| calderon_defect(l, s)).collect();
    assert!(d[1] < d[0] && d[2] < d[1], "{d:?}");
}

#[test]
fn single_layer_point_source_converges() {
    let s = c(2.0, 3.0);
    let x_obs = [1.5, 0.5];
    let exact = fundamental_solution(f64::hypot(x_obs[0], x_obs[1]), s).unwrap();
    let mut errs = Vec::new();
    for level in 0..3 {
        let b = square(level);
        let sp = BoundarySpaces::new(&b, 1).unwrap();
        let v = assemble_v(&b, &sp, s).unwrap();
        let gre = project_boundary_data(&b, &sp, |_, x| fundamental_solution(x[0].hypot(x[1]), s).unwrap().re, SpaceKind::X).unwrap();
        let gim = project_boundary_data(&b, &sp, |_, x| fundamental_solution(x[0].hypot(x[1]), s).unwrap().im, SpaceKind::X).unwrap();
        let m = sp.gram(&b, SpaceKind::X, SpaceKind::X);
        let (mr, mi) = (m.mul_vec(&gre), m.mul_vec(&gim));
        let rhs = DVector::from_fn(sp.dim_x(), |i, _| c(mr[i], mi[i]));
        let lambda = v.lu().solve(&rhs).unwrap();
        let phi = vec![c(0.0, 0.0); sp.dim_y()];
        let lam: Vec<C64> = lambda.iter().copied().collect();
        let u = evaluate_potentials(&b, &sp, s, &lam, &phi, &[x_obs], Default::default()).unwrap();
        // u = −S λ, and S λ reproduces the exterior field.
        errs.push((-u[0] - exact).norm() / exact.norm());
    }
    let rates: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    assert!(rates.iter().all(|&r| r >= 2.0), "{errs:?} {rates:?}");
    assert!(errs[2] < 1e-3);
}
