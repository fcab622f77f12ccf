//! The fully discrete coupled scheme.
//!
//! Unknowns are the interior field `u ∈ U_h`, the exterior normal derivative
//! `λ ∈ X_h` and the exterior trace `φ ∈ Y_h`. In the Laplace domain,
//!
//! ```text
//! F(s) u − Γᵗλ                 = Γᵗβ₁ + f
//! Γ u + V(s) λ − (½I + K(s)) φ = I β₀
//!       (½Iᵗ + Kᵗ(s)) λ + W(s) φ = 0
//! ```
//!
//! with `F(s) = S + s² M`. Trapezoidal convolution quadrature replaces `s` by
//! `δ(ζ)/k`. Two solvers are provided: marching on in time with the boundary
//! memory evaluated from stored weights, and reduction to the boundary,
//! where the boundary unknowns are computed for all steps at once.

mod marching;
mod operators;
mod reduction;
mod stepper;

pub use marching::solve_marching;
pub use operators::{assemble_bh, assemble_fh, boundary_matrix, schur_term, DoubleLayerSign, FemResolvent};
pub use reduction::{postprocess_exterior, solve_reduction_to_boundary};
pub use stepper::InteriorStepper;

use crate::cq::{Contour, TimeGrid};
use crate::fem::{assemble_load, FemSystem};
use crate::parallel::Execution;
use crate::{Error, Point, Result};
use std::sync::Arc;

/// Body force `f(x, t)`.
pub type BodyForce = Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>;

/// A fully specified scattering problem.
#[derive(Clone)]
pub struct ScatteringProblem {
    pub fem: Arc<FemSystem>,
    pub grid: TimeGrid,
    /// `Y_h` coefficients of `β₀(t_n)`, `n = 0..=N`.
    pub beta0: Vec<Vec<f64>>,
    /// `X_h` coefficients of `β₁(t_n)`.
    pub beta1: Vec<Vec<f64>>,
    pub body_force: Option<BodyForce>,
    pub observation_points: Vec<Point>,
}

impl ScatteringProblem {
    /// Checks array sizes, causality of the data and the distance of the
    /// observation points from Γ.
    pub fn validate(&self) -> Result<()> {
        let n = self.grid.n_samples();
        let (nx, ny) = (self.fem.dim_x(), self.fem.dim_y());
        if self.beta0.len() != n || self.beta1.len() != n {
            return Err(Error::InvalidInput(format!(
                "data has {} / {} samples, grid has {n}",
                self.beta0.len(),
                self.beta1.len()
            )));
        }
        if self.beta0.iter().any(|b| b.len() != ny) || self.beta1.iter().any(|b| b.len() != nx) {
            return Err(Error::InvalidInput("data coefficient vectors do not match the boundary spaces".into()));
        }
        let scale = self
            .beta0
            .iter()
            .chain(&self.beta1)
            .flatten()
            .fold(0.0f64, |a, x| a.max(x.abs()));
        let first = self.beta0[0].iter().chain(&self.beta1[0]).fold(0.0f64, |a, x| a.max(x.abs()));
        if first > 1e-12 * scale.max(1e-300) && first > 0.0 {
            return Err(Error::InvalidInput(format!(
                "data must vanish at t = 0 (causal), found {first:.3e}"
            )));
        }
        if let Some(f) = &self.body_force {
            let load = assemble_load(&self.fem.mesh, &self.fem.dofs, |x, t| f(x, t), 0.0);
            if load.iter().any(|v| v.abs() > 1e-12) {
                return Err(Error::InvalidInput("body force must vanish at t = 0 (causal)".into()));
            }
        }
        let b = &self.fem.bmesh;
        for &x in &self.observation_points {
            let (d, panel) = b.distance(x);
            if !(d > b.length(panel)) {
                return Err(Error::NearField {
                    x: x[0],
                    y: x[1],
                    panel,
                    distance: d,
                });
            }
        }
        Ok(())
    }

    /// Load vectors `(f(t_n), w)` for every step (zero without body force).
    pub(crate) fn loads(&self) -> Vec<Vec<f64>> {
        let n = self.fem.n_dofs();
        match &self.body_force {
            None => vec![vec![0.0; n]; self.grid.n_samples()],
            Some(f) => self
                .grid
                .times()
                .into_iter()
                .map(|t| assemble_load(&self.fem.mesh, &self.fem.dofs, |x, tt| f(x, tt), t))
                .collect(),
        }
    }
}

/// Per-step solution sequences.
#[derive(Clone, Debug, Default)]
pub struct SolutionTrace {
    pub u: Vec<Vec<f64>>,
    pub lambda: Vec<Vec<f64>>,
    pub phi: Vec<Vec<f64>>,
    /// `exterior[n][j]`: the exterior field at observation point `j`.
    pub exterior: Vec<Vec<f64>>,
    /// Largest imaginary part discarded when returning to the time domain,
    /// relative to the largest value.
    pub imaginary_residue: f64,
    /// Number of frequency-domain solves performed.
    pub frequency_solves: usize,
}

impl SolutionTrace {
    /// Max-norm over all steps and all components of the difference of two
    /// traces, relative to the max-norm of `self`, for `(u, λ, φ, exterior)`.
    pub fn relative_difference(&self, other: &SolutionTrace) -> [f64; 4] {
        let d = |a: &[Vec<f64>], b: &[Vec<f64>]| {
            let scale = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
            let diff = a
                .iter()
                .zip(b)
                .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
                .fold(0.0f64, f64::max);
            if scale == 0.0 {
                diff
            } else {
                diff / scale
            }
        };
        [
            d(&self.u, &other.u),
            d(&self.lambda, &other.lambda),
            d(&self.phi, &other.phi),
            d(&self.exterior, &other.exterior),
        ]
    }
}

/// Limits of the marching path, which stores `N + 1` dense boundary weights
/// of size `(dim X_h + dim Y_h)²`. The dof limit applies to `dim Y_h`.
pub const MARCHING_MAX_BOUNDARY_DOFS: usize = 256;
pub const MARCHING_MAX_STEPS: usize = 1000;

#[derive(Clone, Copy, Debug, Default)]
pub struct SolverOptions {
    pub exec: Execution,
    /// Contour for the all-steps solves; defaults to [`Contour::for_all_steps`].
    pub contour: Option<Contour>,
    /// Contour for weight generation; defaults to [`Contour::for_weights`].
    pub weights_contour: Option<Contour>,
    pub sign: DoubleLayerSign,
}

impl SolverOptions {
    pub(crate) fn all_steps_contour(&self, grid: &TimeGrid) -> Contour {
        self.contour.unwrap_or_else(|| Contour::for_all_steps(grid))
    }

    pub(crate) fn weight_contour(&self, grid: &TimeGrid) -> Contour {
        self.weights_contour.unwrap_or_else(|| Contour::for_weights(grid))
    }
}
