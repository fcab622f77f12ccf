use super::assembly::volume_rule;
use super::{assemble_load, assemble_stiffness, barycentric_gradients, reference_to_physical, shape, shape_grad};
use super::{CoefficientField, DofMap};
use crate::linalg::{CsrMatrix, EnvelopeLdlt};
use crate::mesh::Mesh;
use crate::{Error, Point, Result};

/// Nodal interpolant (vertex values, plus edge midpoints for `p = 2`).
pub fn interpolate(mesh: &Mesh, dofs: &DofMap, f: impl Fn(Point) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; dofs.n_dofs()];
    for t in 0..mesh.n_triangles() {
        let pts = mesh.triangle_points(t);
        let ed = dofs.element(t);
        for i in 0..3 {
            out[ed[i]] = f(pts[i]);
        }
        if dofs.degree() == 2 {
            for (k, (i, j)) in [(0, 1), (1, 2), (2, 0)].into_iter().enumerate() {
                out[ed[3 + k]] = f([0.5 * (pts[i][0] + pts[j][0]), 0.5 * (pts[i][1] + pts[j][1])]);
            }
        }
    }
    out
}

/// Component of every dof.
fn dof_components(mesh: &Mesh, dofs: &DofMap) -> Vec<usize> {
    let mut out = vec![0; dofs.n_dofs()];
    for t in 0..mesh.n_triangles() {
        for &d in dofs.element(t) {
            out[d] = mesh.components()[t];
        }
    }
    out
}

/// Elliptic projection `Πu ∈ U_h`: `(κ∇(Πu − u), ∇w) = 0` for all `w`, with
/// `∫_{Ω_j} (Πu − u) = 0` on every component, enforced by one Lagrange
/// multiplier per component.
///
/// The saddle-point system is solved by eliminating the multipliers exactly:
/// testing with the component indicators gives each multiplier in closed
/// form, the remaining singular but compatible system is solved with one
/// pinned dof per component, and the constraints fix the free constants.
pub fn elliptic_projection(
    mesh: &Mesh,
    coeff: &dyn CoefficientField,
    degree: usize,
    u: &dyn Fn(Point) -> f64,
    grad_u: &dyn Fn(Point) -> [f64; 2],
) -> Result<Vec<f64>> {
    let dofs = DofMap::new(mesh, degree)?;
    let stiff = assemble_stiffness(mesh, &dofs, coeff)?;
    let n = dofs.n_dofs();
    let comps = dof_components(mesh, &dofs);
    let nc = mesh.n_components();

    // b_i = (κ∇u, ∇w_i) and ∫_{Ω_j} u.
    let rule = volume_rule(degree);
    let mut b = vec![0.0; n];
    let mut mean_u = vec![0.0; nc];
    for t in 0..mesh.n_triangles() {
        let pts = mesh.triangle_points(t);
        let g = barycentric_gradients(pts);
        let jac = 2.0 * mesh.area(t);
        let comp = mesh.components()[t];
        let ed = dofs.element(t);
        for (r, &w) in rule.points.iter().zip(&rule.weights) {
            let (l, x) = reference_to_physical(pts, *r);
            let k = coeff.kappa(x, comp);
            let gu = grad_u(x);
            let kg = [k[0][0] * gu[0] + k[0][1] * gu[1], k[1][0] * gu[0] + k[1][1] * gu[1]];
            for (d, gw) in ed.iter().zip(shape_grad(degree, l, g)) {
                b[*d] += w * jac * (kg[0] * gw[0] + kg[1] * gw[1]);
            }
            mean_u[comp] += w * jac * u(x);
        }
    }
    // C[i, j] = ∫_{Ω_j} w_i, nonzero only for j = comps[i].
    let cvec = assemble_load(mesh, &dofs, |_, _| 1.0, 0.0);
    let mut area = vec![0.0; nc];
    let mut bsum = vec![0.0; nc];
    for i in 0..n {
        area[comps[i]] += cvec[i];
        bsum[comps[i]] += b[i];
    }
    let mu: Vec<f64> = (0..nc).map(|j| bsum[j] / area[j]).collect();
    let mut rhs: Vec<f64> = (0..n).map(|i| b[i] - cvec[i] * mu[comps[i]]).collect();

    // Pin the lowest-numbered dof of each component.
    let mut pinned = vec![usize::MAX; nc];
    for i in (0..n).rev() {
        pinned[comps[i]] = i;
    }
    if pinned.iter().any(|&p| p == usize::MAX) {
        return Err(Error::Singular("a component carries no degrees of freedom".into()));
    }
    let is_pinned = |i: usize| pinned[comps[i]] == i;
    let mut trip: Vec<(usize, usize, f64)> = stiff
        .triplets()
        .into_iter()
        .filter(|&(i, j, _)| !is_pinned(i) && !is_pinned(j))
        .collect();
    for &p in &pinned {
        trip.push((p, p, 1.0));
        rhs[p] = 0.0;
    }
    let reduced = CsrMatrix::from_triplets(n, n, &trip);
    let fact = EnvelopeLdlt::new(&reduced)
        .map_err(|e| Error::Singular(format!("elliptic projection system: {e}")))?;
    let mut x = fact.solve(&rhs);

    let mut mean_x = vec![0.0; nc];
    for i in 0..n {
        mean_x[comps[i]] += cvec[i] * x[i];
    }
    for i in 0..n {
        let j = comps[i];
        x[i] += (mean_u[j] - mean_x[j]) / area[j];
    }
    Ok(x)
}

/// `‖u − u_h‖_{L²(Ω)}` with a rule of degree `2p + 2`.
pub fn l2_error(mesh: &Mesh, dofs: &DofMap, coeffs: &[f64], u: impl Fn(Point) -> f64) -> f64 {
    let p = dofs.degree();
    let rule = volume_rule(p);
    let mut acc = 0.0;
    for t in 0..mesh.n_triangles() {
        let pts = mesh.triangle_points(t);
        let jac = 2.0 * mesh.area(t);
        let ed = dofs.element(t);
        for (r, &w) in rule.points.iter().zip(&rule.weights) {
            let (l, x) = reference_to_physical(pts, *r);
            let uh: f64 = ed.iter().zip(shape(p, l)).map(|(d, s)| coeffs[*d] * s).sum();
            acc += w * jac * (u(x) - uh).powi(2);
        }
    }
    acc.sqrt()
}

/// `‖∇(u − u_h)‖_{L²(Ω)}` with a rule of degree `2p + 2`.
pub fn h1_seminorm_error(mesh: &Mesh, dofs: &DofMap, coeffs: &[f64], grad_u: impl Fn(Point) -> [f64; 2]) -> f64 {
    let p = dofs.degree();
    let rule = volume_rule(p);
    let mut acc = 0.0;
    for t in 0..mesh.n_triangles() {
        let pts = mesh.triangle_points(t);
        let g = barycentric_gradients(pts);
        let jac = 2.0 * mesh.area(t);
        let ed = dofs.element(t);
        for (r, &w) in rule.points.iter().zip(&rule.weights) {
            let (l, x) = reference_to_physical(pts, *r);
            let mut gh = [0.0; 2];
            for (d, gs) in ed.iter().zip(shape_grad(p, l, g)) {
                gh[0] += coeffs[*d] * gs[0];
                gh[1] += coeffs[*d] * gs[1];
            }
            let gu = grad_u(x);
            acc += w * jac * ((gu[0] - gh[0]).powi(2) + (gu[1] - gh[1]).powi(2));
        }
    }
    acc.sqrt()
}
