//! Interior finite elements: continuous `P1`/`P2` Lagrange spaces, the
//! weighted mass and anisotropic stiffness matrices, the boundary coupling
//! matrix, load vectors, and the elliptic projection.

mod assembly;
mod coefficients;
mod projection;

pub use assembly::{assemble_coupling, assemble_load, assemble_mass, assemble_stiffness, validate_coefficients};
pub use coefficients::{CoefficientField, ConstantCoefficients, FnCoefficients, PerComponentCoefficients, Tensor};
pub use projection::{elliptic_projection, interpolate, l2_error, h1_seminorm_error};

use crate::bem::BoundarySpaces;
use crate::linalg::CsrMatrix;
use crate::mesh::{sorted_edge, BoundaryMesh, Mesh};
use crate::{Error, Result};

/// Degree-of-freedom numbering for continuous `P_p` on a triangulation:
/// vertex dofs first (same index as the vertex), then one dof per edge for
/// `p = 2` in [`Mesh::edges`] order.
#[derive(Clone, Debug)]
pub struct DofMap {
    degree: usize,
    n_dofs: usize,
    element_dofs: Vec<Vec<usize>>,
}

impl DofMap {
    pub fn new(mesh: &Mesh, degree: usize) -> Result<Self> {
        if !(1..=2).contains(&degree) {
            return Err(Error::InvalidInput(format!("FEM degree must be 1 or 2, got {degree}")));
        }
        let nv = mesh.n_vertices();
        if degree == 1 {
            return Ok(DofMap {
                degree,
                n_dofs: nv,
                element_dofs: mesh.triangles().iter().map(|t| t.to_vec()).collect(),
            });
        }
        let edge = mesh.edge_index();
        let element_dofs = mesh
            .triangles()
            .iter()
            .map(|&[a, b, c]| {
                vec![
                    a,
                    b,
                    c,
                    nv + edge[&sorted_edge(a, b)],
                    nv + edge[&sorted_edge(b, c)],
                    nv + edge[&sorted_edge(c, a)],
                ]
            })
            .collect();
        Ok(DofMap {
            degree,
            n_dofs: nv + edge.len(),
            element_dofs,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    /// Local dofs of triangle `t`: vertices, then edges `01, 12, 20`.
    pub fn element(&self, t: usize) -> &[usize] {
        &self.element_dofs[t]
    }
}

/// Local `P_p` shape functions at barycentric coordinates `l`.
pub(crate) fn shape(degree: usize, l: [f64; 3]) -> Vec<f64> {
    match degree {
        1 => l.to_vec(),
        _ => vec![
            l[0] * (2.0 * l[0] - 1.0),
            l[1] * (2.0 * l[1] - 1.0),
            l[2] * (2.0 * l[2] - 1.0),
            4.0 * l[0] * l[1],
            4.0 * l[1] * l[2],
            4.0 * l[2] * l[0],
        ],
    }
}

/// Gradients of the local shape functions given the (constant) barycentric
/// gradients `g`.
pub(crate) fn shape_grad(degree: usize, l: [f64; 3], g: [[f64; 2]; 3]) -> Vec<[f64; 2]> {
    let lin = |a: f64, ga: [f64; 2], b: f64, gb: [f64; 2]| [a * ga[0] + b * gb[0], a * ga[1] + b * gb[1]];
    match degree {
        1 => g.to_vec(),
        _ => {
            let mut out = Vec::with_capacity(6);
            for i in 0..3 {
                let f = 4.0 * l[i] - 1.0;
                out.push([f * g[i][0], f * g[i][1]]);
            }
            for (i, j) in [(0, 1), (1, 2), (2, 0)] {
                out.push(lin(4.0 * l[j], g[i], 4.0 * l[i], g[j]));
            }
            out
        }
    }
}

/// Barycentric gradients of a triangle with positive area.
pub(crate) fn barycentric_gradients(p: [[f64; 2]; 3]) -> [[f64; 2]; 3] {
    let two_a = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]);
    [
        [(p[1][1] - p[2][1]) / two_a, (p[2][0] - p[1][0]) / two_a],
        [(p[2][1] - p[0][1]) / two_a, (p[0][0] - p[2][0]) / two_a],
        [(p[0][1] - p[1][1]) / two_a, (p[1][0] - p[0][0]) / two_a],
    ]
}

/// Maps reference coordinates `(ξ, η)` to barycentric coordinates and the
/// physical point.
pub(crate) fn reference_to_physical(p: [[f64; 2]; 3], r: [f64; 2]) -> ([f64; 3], [f64; 2]) {
    let l = [1.0 - r[0] - r[1], r[0], r[1]];
    let x = [
        l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
        l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
    ];
    (l, x)
}

/// Every interior finite element object needed by the coupled scheme.
#[derive(Clone, Debug)]
pub struct FemSystem {
    pub mesh: Mesh,
    pub bmesh: BoundaryMesh,
    pub dofs: DofMap,
    pub spaces: BoundarySpaces,
    /// `∫ c⁻² w_i w_j`.
    pub mass: CsrMatrix<f64>,
    /// `∫ κ∇w_i·∇w_j`.
    pub stiffness: CsrMatrix<f64>,
    /// `∫_Γ μ_i γw_j`, rows in `X_h`, columns in `U_h`.
    pub gamma: CsrMatrix<f64>,
    /// `∫_Γ μ_i ψ_j`, rows in `X_h`, columns in `Y_h`.
    pub ih: CsrMatrix<f64>,
    /// `U_h` dof carrying each `Y_h` dof.
    pub y_to_u: Vec<usize>,
}

impl FemSystem {
    pub fn assemble(mesh: &Mesh, bmesh: &BoundaryMesh, coeff: &dyn CoefficientField, degree: usize) -> Result<Self> {
        let dofs = DofMap::new(mesh, degree)?;
        let spaces = BoundarySpaces::new(bmesh, degree)?;
        validate_coefficients(mesh, coeff, degree)?;
        let mass = assemble_mass(mesh, &dofs, coeff)?;
        let stiffness = assemble_stiffness(mesh, &dofs, coeff)?;
        let (gamma, ih, y_to_u) = assemble_coupling(mesh, bmesh, &dofs, &spaces)?;
        Ok(FemSystem {
            mesh: mesh.clone(),
            bmesh: bmesh.clone(),
            dofs,
            spaces,
            mass,
            stiffness,
            gamma,
            ih,
            y_to_u,
        })
    }

    pub fn degree(&self) -> usize {
        self.dofs.degree()
    }

    pub fn n_dofs(&self) -> usize {
        self.dofs.n_dofs()
    }

    pub fn dim_x(&self) -> usize {
        self.spaces.dim_x()
    }

    pub fn dim_y(&self) -> usize {
        self.spaces.dim_y()
    }

    /// `Γᵗ μ` for an `X_h` coefficient vector.
    pub fn gamma_t(&self, mu: &[f64]) -> Vec<f64> {
        self.gamma.mul_vec_transpose(mu)
    }
}
