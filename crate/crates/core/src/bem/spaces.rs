//! Boundary element spaces on the inherited panel partition.
//!
//! `Y_h`: continuous piecewise polynomials of degree `p` (node dofs, then one
//! interior dof per panel when `p = 2`).
//! `X_h`: discontinuous piecewise polynomials of degree `p − 1` (`p` dofs per
//! panel, numbered panel by panel).

use crate::linalg::{CsrMatrix, EnvelopeLdlt};
use crate::mesh::BoundaryMesh;
use crate::quadrature::Rule1d;
use crate::{Error, Point, Result};

/// The pair `(Y_h, X_h)` of boundary spaces for FEM degree `p ∈ {1, 2}`.
#[derive(Clone, Debug)]
pub struct BoundarySpaces {
    degree: usize,
    n_nodes: usize,
    panels: Vec<[usize; 2]>,
}

/// Which boundary space a coefficient vector lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceKind {
    X,
    Y,
}

impl BoundarySpaces {
    pub fn new(bmesh: &BoundaryMesh, degree: usize) -> Result<Self> {
        if !(1..=2).contains(&degree) {
            return Err(Error::InvalidInput(format!("degree must be 1 or 2, got {degree}")));
        }
        Ok(BoundarySpaces {
            degree,
            n_nodes: bmesh.n_nodes(),
            panels: bmesh.panels().to_vec(),
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_panels(&self) -> usize {
        self.panels.len()
    }

    pub fn dim_y(&self) -> usize {
        self.n_nodes + if self.degree == 2 { self.panels.len() } else { 0 }
    }

    pub fn dim_x(&self) -> usize {
        self.degree * self.panels.len()
    }

    pub fn dim(&self, kind: SpaceKind) -> usize {
        match kind {
            SpaceKind::X => self.dim_x(),
            SpaceKind::Y => self.dim_y(),
        }
    }

    /// Local `Y_h` dofs of a panel: start node, end node, then the interior
    /// dof for `p = 2`.
    pub fn y_dofs(&self, p: usize) -> Vec<usize> {
        let [a, b] = self.panels[p];
        let mut d = vec![a, b];
        if self.degree == 2 {
            d.push(self.n_nodes + p);
        }
        d
    }

    pub fn x_dofs(&self, p: usize) -> Vec<usize> {
        (0..self.degree).map(|i| self.degree * p + i).collect()
    }

    pub fn dofs(&self, kind: SpaceKind, p: usize) -> Vec<usize> {
        match kind {
            SpaceKind::X => self.x_dofs(p),
            SpaceKind::Y => self.y_dofs(p),
        }
    }

    /// Local `Y_h` basis at panel parameter `t ∈ [0, 1]`.
    pub fn y_basis(&self, t: f64) -> Vec<f64> {
        y_basis(self.degree, t)
    }

    /// Derivatives of the local `Y_h` basis with respect to `t`.
    pub fn y_basis_dt(&self, t: f64) -> Vec<f64> {
        match self.degree {
            1 => vec![-1.0, 1.0],
            _ => vec![4.0 * t - 3.0, 4.0 * t - 1.0, 4.0 - 8.0 * t],
        }
    }

    pub fn x_basis(&self, t: f64) -> Vec<f64> {
        match self.degree {
            1 => vec![1.0],
            _ => vec![1.0 - t, t],
        }
    }

    pub fn basis(&self, kind: SpaceKind, t: f64) -> Vec<f64> {
        match kind {
            SpaceKind::X => self.x_basis(t),
            SpaceKind::Y => self.y_basis(t),
        }
    }

    /// Evaluates a coefficient vector at parameter `t` of panel `p`.
    pub fn evaluate(&self, kind: SpaceKind, coeffs: &[f64], p: usize, t: f64) -> f64 {
        self.dofs(kind, p)
            .iter()
            .zip(self.basis(kind, t))
            .map(|(&d, b)| coeffs[d] * b)
            .sum()
    }

    /// Exact Gram matrix between two spaces, `∫_Γ a_i b_j`.
    pub fn gram(&self, bmesh: &BoundaryMesh, a: SpaceKind, b: SpaceKind) -> CsrMatrix<f64> {
        let rule = Rule1d::gauss(self.degree + 1);
        let mut trip = Vec::new();
        for p in 0..self.n_panels() {
            let h = bmesh.length(p);
            let (da, db) = (self.dofs(a, p), self.dofs(b, p));
            let mut local = vec![0.0; da.len() * db.len()];
            for (&t, &w) in rule.points.iter().zip(&rule.weights) {
                let (ba, bb) = (self.basis(a, t), self.basis(b, t));
                for i in 0..da.len() {
                    for j in 0..db.len() {
                        local[i * db.len() + j] += w * h * ba[i] * bb[j];
                    }
                }
            }
            for i in 0..da.len() {
                for j in 0..db.len() {
                    trip.push((da[i], db[j], local[i * db.len() + j]));
                }
            }
        }
        CsrMatrix::from_triplets(self.dim(a), self.dim(b), &trip)
    }

    /// The pairing matrix `I_h[μ_i, ψ_j] = ∫_Γ μ_i ψ_j` (`X_h × Y_h`).
    pub fn pairing(&self, bmesh: &BoundaryMesh) -> CsrMatrix<f64> {
        self.gram(bmesh, SpaceKind::X, SpaceKind::Y)
    }
}

pub(crate) fn y_basis(degree: usize, t: f64) -> Vec<f64> {
    match degree {
        1 => vec![1.0 - t, t],
        _ => vec![(1.0 - t) * (1.0 - 2.0 * t), t * (2.0 * t - 1.0), 4.0 * t * (1.0 - t)],
    }
}

/// Cached `L²` projector onto `X_h` or `Y_h`.
pub struct BoundaryProjector {
    kind: SpaceKind,
    mass: EnvelopeLdlt<f64>,
    rule: Rule1d,
}

impl BoundaryProjector {
    pub fn new(bmesh: &BoundaryMesh, spaces: &BoundarySpaces, kind: SpaceKind) -> Result<Self> {
        let gram = spaces.gram(bmesh, kind, kind);
        Ok(BoundaryProjector {
            kind,
            mass: EnvelopeLdlt::new(&gram)?,
            rule: Rule1d::gauss(10),
        })
    }

    /// `L²` projection of `g(panel, x)` (the panel index lets `g` use the
    /// panel normal).
    pub fn project(
        &self,
        bmesh: &BoundaryMesh,
        spaces: &BoundarySpaces,
        g: impl Fn(usize, Point) -> f64,
    ) -> Vec<f64> {
        let mut rhs = vec![0.0; spaces.dim(self.kind)];
        for p in 0..bmesh.n_panels() {
            let h = bmesh.length(p);
            let dofs = spaces.dofs(self.kind, p);
            for (&t, &w) in self.rule.points.iter().zip(&self.rule.weights) {
                let gv = g(p, bmesh.point_at(p, t));
                for (d, b) in dofs.iter().zip(spaces.basis(self.kind, t)) {
                    rhs[*d] += w * h * gv * b;
                }
            }
        }
        self.mass.solve_in_place(&mut rhs);
        rhs
    }
}

/// `L²` projection of a boundary function onto `X_h` or `Y_h`.
pub fn project_boundary_data(
    bmesh: &BoundaryMesh,
    spaces: &BoundarySpaces,
    g: impl Fn(usize, Point) -> f64,
    target: SpaceKind,
) -> Result<Vec<f64>> {
    Ok(BoundaryProjector::new(bmesh, spaces, target)?.project(bmesh, spaces, g))
}

/// `L²(Γ)` distance between a discrete function and `g`, by panel Gauss
/// quadrature.
pub fn boundary_l2_error(
    bmesh: &BoundaryMesh,
    spaces: &BoundarySpaces,
    kind: SpaceKind,
    coeffs: &[f64],
    g: impl Fn(usize, Point) -> f64,
) -> f64 {
    let rule = Rule1d::gauss(10);
    let mut acc = 0.0;
    for p in 0..bmesh.n_panels() {
        let h = bmesh.length(p);
        for (&t, &w) in rule.points.iter().zip(&rule.weights) {
            let e = spaces.evaluate(kind, coeffs, p, t) - g(p, bmesh.point_at(p, t));
            acc += w * h * e * e;
        }
    }
    acc.sqrt()
}
