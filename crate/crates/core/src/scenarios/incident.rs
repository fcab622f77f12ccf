use super::signals::{CausalSignal, Jet};
use super::{sample_boundary_data, BoundaryData};
use crate::coupled::ScatteringProblem;
use crate::cq::TimeGrid;
use crate::fem::FemSystem;
use crate::mesh::BoundaryMesh;
use crate::parallel::Execution;
use crate::{Error, Point, Result};
use std::sync::Arc;

/// Incident plane wave `u_inc(x, t) = s(t − t₀ − x·d)` travelling along `d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneWave {
    pub direction: Point,
    pub signal: CausalSignal,
    pub delay: f64,
}

/// Checks `|d| = 1` and the signal parameters.
pub fn plane_wave_incident(direction: Point, signal: CausalSignal, delay: f64) -> Result<PlaneWave> {
    let n = direction[0].hypot(direction[1]);
    if !((n - 1.0).abs() < 1e-12) {
        return Err(Error::InvalidInput(format!("direction {direction:?} is not a unit vector")));
    }
    if !delay.is_finite() {
        return Err(Error::InvalidInput("delay must be finite".into()));
    }
    signal.validate()?;
    Ok(PlaneWave { direction, signal, delay })
}

impl PlaneWave {
    /// Smallest delay for which the wave has not reached Γ at `t = 0`.
    pub fn min_delay(direction: Point, bmesh: &BoundaryMesh) -> f64 {
        let m = bmesh
            .node_coords()
            .iter()
            .map(|x| x[0] * direction[0] + x[1] * direction[1])
            .fold(f64::INFINITY, f64::min);
        (-m).max(0.0)
    }

    fn jet(&self, x: Point, t: f64) -> Jet {
        self.signal
            .jet(t - self.delay - x[0] * self.direction[0] - x[1] * self.direction[1])
    }

    pub fn value(&self, x: Point, t: f64) -> f64 {
        self.jet(x, t).v
    }

    pub fn grad(&self, x: Point, t: f64) -> [f64; 2] {
        let d = self.jet(x, t).d;
        [-self.direction[0] * d, -self.direction[1] * d]
    }

    /// `β₀ = γ u_inc`.
    pub fn beta0(&self, x: Point, t: f64) -> f64 {
        self.value(x, t)
    }

    /// `β₁ = ∂_ν u_inc = −(d·ν) s'`.
    pub fn beta1(&self, x: Point, nu: Point, t: f64) -> f64 {
        let g = self.grad(x, t);
        g[0] * nu[0] + g[1] * nu[1]
    }

    pub fn boundary_data(&self, fem: &FemSystem, grid: &TimeGrid, exec: Execution) -> Result<BoundaryData> {
        sample_boundary_data(fem, grid, |x, t| self.beta0(x, t), |x, nu, t| self.beta1(x, nu, t), exec)
    }

    /// Scattering of this wave by the obstacles of `fem`.
    pub fn problem(&self, fem: Arc<FemSystem>, grid: TimeGrid, points: Vec<Point>, exec: Execution) -> Result<ScatteringProblem> {
        let (beta0, beta1) = self.boundary_data(&fem, &grid, exec)?;
        Ok(ScatteringProblem {
            fem,
            grid,
            beta0,
            beta1,
            body_force: None,
            observation_points: points,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{extract_boundary, generate_square_mesh};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn wave() -> PlaneWave {
        plane_wave_incident([FRAC_1_SQRT_2, FRAC_1_SQRT_2], CausalSignal::interior_default(), FRAC_1_SQRT_2).unwrap()
    }

    #[test]
    fn rejects_non_unit_direction() {
        assert!(plane_wave_incident([2.0, 0.0], CausalSignal::interior_default(), 1.0).is_err());
    }

    #[test]
    fn zero_before_arrival() {
        let w = wave();
        let b = extract_boundary(&generate_square_mesh(0)).unwrap();
        assert!((PlaneWave::min_delay(w.direction, &b) - FRAC_1_SQRT_2).abs() < 1e-15);
        for x in b.node_coords() {
            assert_eq!(w.beta0(*x, 0.0), 0.0);
            assert_eq!(w.beta1(*x, [1.0, 0.0], 0.0), 0.0);
        }
    }

    #[test]
    fn normal_derivative_vanishes_for_orthogonal_normal() {
        let w = wave();
        let nu = [FRAC_1_SQRT_2, -FRAC_1_SQRT_2];
        assert!(w.beta1([0.3, 0.1], nu, 2.0).abs() < 1e-15);
    }

    #[test]
    fn normal_derivative_matches_finite_differences() {
        let w = wave();
        let nu = [0.6, -0.8];
        let x = [0.2, -0.1];
        for t in [1.0, 1.5, 2.3] {
            let h = 1e-5;
            let fd = (w.beta0([x[0] + h * nu[0], x[1] + h * nu[1]], t) - w.beta0([x[0] - h * nu[0], x[1] - h * nu[1]], t))
                / (2.0 * h);
            assert!((fd - w.beta1(x, nu, t)).abs() < 1e-8);
        }
    }
}
