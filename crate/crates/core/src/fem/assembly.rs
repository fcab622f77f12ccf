use super::{barycentric_gradients, reference_to_physical, shape, shape_grad, CoefficientField, DofMap};
use crate::bem::BoundarySpaces;
use crate::linalg::CsrMatrix;
use crate::mesh::{sorted_edge, BoundaryMesh, Mesh};
use crate::quadrature::{Rule1d, TriangleRule};
use crate::{Error, Point, Result};

/// Triangle rule exact to degree `2p + 2`.
pub(crate) fn volume_rule(degree: usize) -> TriangleRule {
    TriangleRule::with_degree(2 * degree + 2)
}

/// Checks `c > 0` and `κ` symmetric positive definite at every quadrature
/// point.
pub fn validate_coefficients(mesh: &Mesh, coeff: &dyn CoefficientField, degree: usize) -> Result<()> {
    let rule = volume_rule(degree);
    for t in 0..mesh.n_triangles() {
        let pts = mesh.triangle_points(t);
        let comp = mesh.components()[t];
        for r in &rule.points {
            let (_, x) = reference_to_physical(pts, *r);
            let fail = |message: String| Error::Coefficient {
                x: x[0],
                y: x[1],
                message,
            };
            let c = coeff.c(x, comp);
            if !(c > 0.0) || !c.is_finite() {
                return Err(fail(format!("c = {c} is not positive")));
            }
            let k = coeff.kappa(x, comp);
            let scale = k.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
            if !k.iter().flatten().all(|v| v.is_finite()) {
                return Err(fail("κ has non-finite entries".into()));
            }
            if (k[0][1] - k[1][0]).abs() > 1e-12 * scale {
                return Err(fail(format!("κ = {k:?} is not symmetric")));
            }
            let tr = k[0][0] + k[1][1];
            let det = k[0][0] * k[1][1] - k[0][1] * k[1][0];
            let disc = ((k[0][0] - k[1][1]).powi(2) + 4.0 * k[0][1] * k[1][0]).max(0.0).sqrt();
            let min_eig = 0.5 * (tr - disc);
            if !(min_eig > 0.0) || !(det > 0.0) {
                return Err(fail(format!("κ = {k:?} is not positive definite")));
            }
        }
    }
    Ok(())
}

fn assemble_bilinear(
    mesh: &Mesh,
    dofs: &DofMap,
    mut integrand: impl FnMut(usize, Point, &[f64], &[[f64; 2]], &mut [f64], f64),
) -> CsrMatrix<f64> {
    let p = dofs.degree();
    let rule = volume_rule(p);
    let nl = if p == 1 { 3 } else { 6 };
    let mut trip = Vec::with_capacity(mesh.n_triangles() * nl * nl);
    let mut local = vec![0.0; nl * nl];
    for t in 0..mesh.n_triangles() {
        let pts = mesh.triangle_points(t);
        let g = barycentric_gradients(pts);
        let jac = 2.0 * mesh.area(t);
        local.iter_mut().for_each(|v| *v = 0.0);
        for (r, &w) in rule.points.iter().zip(&rule.weights) {
            let (l, x) = reference_to_physical(pts, *r);
            let phi = shape(p, l);
            let dphi = shape_grad(p, l, g);
            integrand(t, x, &phi, &dphi, &mut local, w * jac);
        }
        let ed = dofs.element(t);
        for i in 0..nl {
            for j in 0..nl {
                trip.push((ed[i], ed[j], local[i * nl + j]));
            }
        }
    }
    CsrMatrix::from_triplets(dofs.n_dofs(), dofs.n_dofs(), &trip)
}

/// Galerkin matrix of `(c⁻² u, w)` on continuous `P_p`.
pub fn assemble_mass(mesh: &Mesh, dofs: &DofMap, coeff: &dyn CoefficientField) -> Result<CsrMatrix<f64>> {
    let comps = mesh.components();
    Ok(assemble_bilinear(mesh, dofs, |t, x, phi, _, local, w| {
        let c = coeff.c(x, comps[t]);
        let f = w / (c * c);
        let n = phi.len();
        for i in 0..n {
            for j in 0..n {
                local[i * n + j] += f * phi[i] * phi[j];
            }
        }
    }))
}

/// Galerkin matrix of `(κ∇u, ∇w)` on continuous `P_p`.
pub fn assemble_stiffness(mesh: &Mesh, dofs: &DofMap, coeff: &dyn CoefficientField) -> Result<CsrMatrix<f64>> {
    let comps = mesh.components();
    Ok(assemble_bilinear(mesh, dofs, |t, x, _, dphi, local, w| {
        let k = coeff.kappa(x, comps[t]);
        let n = dphi.len();
        for j in 0..n {
            let kg = [
                k[0][0] * dphi[j][0] + k[0][1] * dphi[j][1],
                k[1][0] * dphi[j][0] + k[1][1] * dphi[j][1],
            ];
            for i in 0..n {
                local[i * n + j] += w * (dphi[i][0] * kg[0] + dphi[i][1] * kg[1]);
            }
        }
    }))
}

/// Load vector `∫ f(·, t) w_i` with a rule of degree `2p + 2`.
pub fn assemble_load(mesh: &Mesh, dofs: &DofMap, f: impl Fn(Point, f64) -> f64, t: f64) -> Vec<f64> {
    let p = dofs.degree();
    let rule = volume_rule(p);
    let mut out = vec![0.0; dofs.n_dofs()];
    for e in 0..mesh.n_triangles() {
        let pts = mesh.triangle_points(e);
        let jac = 2.0 * mesh.area(e);
        let ed = dofs.element(e);
        for (r, &w) in rule.points.iter().zip(&rule.weights) {
            let (l, x) = reference_to_physical(pts, *r);
            let fx = f(x, t) * w * jac;
            if fx == 0.0 {
                continue;
            }
            for (d, s) in ed.iter().zip(shape(p, l)) {
                out[*d] += fx * s;
            }
        }
    }
    out
}

/// Returns `(Γ, I_h, y_to_u)`: the `X_h × U_h` trace pairing, the
/// `X_h × Y_h` boundary pairing, and the `U_h` dof of each `Y_h` dof.
///
/// Both matrices are filled from the same panel-local integrals, so `Γ`
/// restricted to boundary columns equals `I_h` bit for bit.
pub fn assemble_coupling(
    mesh: &Mesh,
    bmesh: &BoundaryMesh,
    dofs: &DofMap,
    spaces: &BoundarySpaces,
) -> Result<(CsrMatrix<f64>, CsrMatrix<f64>, Vec<usize>)> {
    let p = dofs.degree();
    if spaces.degree() != p {
        return Err(Error::InvalidInput(format!(
            "boundary spaces of degree {} paired with FEM degree {p}",
            spaces.degree()
        )));
    }
    let edge = mesh.edge_index();
    let nv = mesh.n_vertices();
    let mut y_to_u = vec![usize::MAX; spaces.dim_y()];
    for pan in 0..bmesh.n_panels() {
        let [a, b] = bmesh.panel_volume_vertices(pan);
        if a >= nv || b >= nv || bmesh.node_coords()[bmesh.panels()[pan][0]] != mesh.vertices()[a] {
            return Err(Error::InvalidInput(format!("panel {pan} does not match the volume mesh")));
        }
        let Some(&e) = edge.get(&sorted_edge(a, b)) else {
            return Err(Error::InvalidInput(format!(
                "panel {pan} ({a}-{b}) is not an edge of the volume mesh"
            )));
        };
        let yd = spaces.y_dofs(pan);
        y_to_u[yd[0]] = a;
        y_to_u[yd[1]] = b;
        if p == 2 {
            y_to_u[yd[2]] = nv + e;
        }
    }
    let rule = Rule1d::gauss(p + 1);
    let mut g_trip = Vec::new();
    let mut i_trip = Vec::new();
    for pan in 0..bmesh.n_panels() {
        let h = bmesh.length(pan);
        let (xd, yd) = (spaces.x_dofs(pan), spaces.y_dofs(pan));
        let mut local = vec![0.0; xd.len() * yd.len()];
        for (&t, &w) in rule.points.iter().zip(&rule.weights) {
            let (bx, by) = (spaces.x_basis(t), spaces.y_basis(t));
            for i in 0..xd.len() {
                for j in 0..yd.len() {
                    local[i * yd.len() + j] += w * h * bx[i] * by[j];
                }
            }
        }
        for i in 0..xd.len() {
            for j in 0..yd.len() {
                let v = local[i * yd.len() + j];
                i_trip.push((xd[i], yd[j], v));
                g_trip.push((xd[i], y_to_u[yd[j]], v));
            }
        }
    }
    let gamma = CsrMatrix::from_triplets(spaces.dim_x(), dofs.n_dofs(), &g_trip);
    let ih = CsrMatrix::from_triplets(spaces.dim_x(), spaces.dim_y(), &i_trip);
    Ok((gamma, ih, y_to_u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{ConstantCoefficients, FnCoefficients};
    use crate::linalg::EnvelopeLdlt;
    use crate::mesh::{extract_boundary, generate_square_mesh, refine_uniform};

    #[test]
    fn mass_partition_of_unity() {
        for p in 1..=2 {
            let m = generate_square_mesh(0);
            let d = DofMap::new(&m, p).unwrap();
            let mass = assemble_mass(&m, &d, &ConstantCoefficients::unit()).unwrap();
            let one = vec![1.0; d.n_dofs()];
            assert!((mass.quadratic_form(&one) - 1.0).abs() < 1e-12);
            let c2 = ConstantCoefficients { c: 2.0, ..ConstantCoefficients::unit() };
            let mass2 = assemble_mass(&m, &d, &c2).unwrap();
            assert!((mass2.quadratic_form(&one) - 0.25).abs() < 1e-12);
            assert!(mass.symmetry_defect() < 1e-14);
            assert!(EnvelopeLdlt::new(&mass).is_ok());
        }
    }

    #[test]
    fn stiffness_kernel_and_energy() {
        let m = generate_square_mesh(1);
        for p in 1..=2 {
            let d = DofMap::new(&m, p).unwrap();
            let kappa = FnCoefficients::new(|_| 1.0, |x| [[2.0 + x[0], 0.3], [0.3, 1.0 + x[1] * x[1]]]);
            let s = assemble_stiffness(&m, &d, &kappa).unwrap();
            let one = vec![1.0; d.n_dofs()];
            assert!(s.mul_vec(&one).iter().all(|v| v.abs() < 1e-12));
            assert!(s.symmetry_defect() < 1e-14);
            let s1 = assemble_stiffness(&m, &d, &ConstantCoefficients::unit()).unwrap();
            let x = crate::fem::interpolate(&m, &d, |x| x[0]);
            assert!((s1.quadratic_form(&x) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn coupling_identification_is_exact() {
        let m = refine_uniform(&generate_square_mesh(0));
        let b = extract_boundary(&m).unwrap();
        for p in 1..=2 {
            let d = DofMap::new(&m, p).unwrap();
            let sp = BoundarySpaces::new(&b, p).unwrap();
            let (g, ih, y_to_u) = assemble_coupling(&m, &b, &d, &sp).unwrap();
            for i in 0..sp.dim_x() {
                for j in 0..sp.dim_y() {
                    assert_eq!(g.get(i, y_to_u[j]).to_bits(), ih.get(i, j).to_bits());
                }
            }
            // Columns of interior dofs vanish.
            let mut boundary = vec![false; d.n_dofs()];
            y_to_u.iter().for_each(|&u| boundary[u] = true);
            for (_, j, v) in g.triplets() {
                assert!(boundary[j] || v == 0.0);
            }
            if p == 1 {
                let h = b.length(0);
                assert!((g.get(0, b.panel_volume_vertices(0)[0]) - h / 2.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn load_of_constant_sums_to_area() {
        let m = generate_square_mesh(0);
        for p in 1..=2 {
            let d = DofMap::new(&m, p).unwrap();
            let f = assemble_load(&m, &d, |_, _| 1.0, 0.0);
            assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-13);
            assert!(assemble_load(&m, &d, |_, _| 0.0, 0.0).iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn invalid_coefficients_rejected() {
        let m = generate_square_mesh(0);
        let bad = ConstantCoefficients { c: 1.0, kappa: [[1.0, 2.0], [2.0, 1.0]] };
        assert!(matches!(validate_coefficients(&m, &bad, 1), Err(Error::Coefficient { .. })));
        let asym = ConstantCoefficients { c: 1.0, kappa: [[1.0, 0.1], [0.0, 1.0]] };
        assert!(validate_coefficients(&m, &asym, 1).is_err());
        let neg_c = ConstantCoefficients { c: -1.0, ..ConstantCoefficients::unit() };
        assert!(validate_coefficients(&m, &neg_c, 1).is_err());
    }
}
