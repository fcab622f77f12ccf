use super::signals::{CausalSignal, Jet};
use super::{sample_boundary_data, BoundaryData};
use crate::coupled::{BodyForce, ScatteringProblem};
use crate::cq::TimeGrid;
use crate::fem::{FemSystem, FnCoefficients, Tensor};
use crate::parallel::Execution;
use crate::quadrature::Rule1d;
use crate::{Error, Point, Result};
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::{Arc, OnceLock};

/// Field produced by a point source at the origin radiating `g(t)`:
/// `u(r, t) = (1/2π) ∫₀^{arccosh(t/r)} g(t − r cosh θ) dθ` and `∂u/∂r`.
///
/// The integrand is smooth on the whole range, so composite Gauss in `θ`
/// with pieces scaled to the signal span is enough.
pub fn cylindrical_wave(g: &CausalSignal, r: f64, t: f64) -> Result<(f64, f64)> {
    if !(r > 0.0) {
        return Err(Error::InvalidInput(format!("cylindrical wave evaluated at r = {r}")));
    }
    if t <= r {
        return Ok((0.0, 0.0));
    }
    static RULE: OnceLock<Rule1d> = OnceLock::new();
    let rule = RULE.get_or_init(|| Rule1d::gauss(12));
    let theta_max = (t / r).acosh();
    let pieces = 4 + (8.0 * (t - r)).ceil() as usize;
    let h = theta_max / pieces as f64;
    let (mut u, mut du) = (0.0, 0.0);
    for p in 0..pieces {
        for (&x, &w) in rule.points.iter().zip(&rule.weights) {
            let th = (p as f64 + x) * h;
            let c = th.cosh();
            let j = g.jet(t - r * c);
            u += w * j.v;
            du -= w * c * j.d;
        }
    }
    Ok((u * h / (2.0 * PI), du * h / (2.0 * PI)))
}

/// Coefficient choice for the manufactured interior.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ManufacturedKappa {
    /// `κ = [[1 + r²/2, 1/4 + r²/2], [1/4 + r²/2, 3 + r²/2]]`.
    #[default]
    Polynomial,
    /// `κ = I`.
    Identity,
}

/// Artificial scattering problem on `[−0.5, 0.5]²` with known solution: a
/// plane wave inside (kept a solution by a body force) and a cylindrical
/// wave from a source at the origin outside. The transmission data are the
/// mismatch of the two fields on Γ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ManufacturedCase {
    pub direction: Point,
    /// Delay of the interior wave; `1/√2` keeps it zero on the square at `t = 0`.
    pub delay: f64,
    pub interior_signal: CausalSignal,
    pub exterior_signal: CausalSignal,
    pub kappa: ManufacturedKappa,
}

/// The manufactured test case with the given interior coefficient.
pub fn manufactured_case_1(kappa: ManufacturedKappa) -> ManufacturedCase {
    ManufacturedCase {
        direction: [FRAC_1_SQRT_2, FRAC_1_SQRT_2],
        delay: FRAC_1_SQRT_2,
        interior_signal: CausalSignal::interior_default(),
        exterior_signal: CausalSignal::exterior_default(),
        kappa,
    }
}

impl ManufacturedCase {
    pub fn kappa_at(&self, x: Point) -> Tensor {
        match self.kappa {
            ManufacturedKappa::Identity => [[1.0, 0.0], [0.0, 1.0]],
            ManufacturedKappa::Polynomial => {
                let q = 0.5 * (x[0] * x[0] + x[1] * x[1]);
                [[1.0 + q, 0.25 + q], [0.25 + q, 3.0 + q]]
            }
        }
    }

    /// `∇·(κ d)`.
    fn div_kappa_d(&self, x: Point) -> f64 {
        match self.kappa {
            ManufacturedKappa::Identity => 0.0,
            ManufacturedKappa::Polynomial => (self.direction[0] + self.direction[1]) * (x[0] + x[1]),
        }
    }

    /// `c ≡ 1` and [`Self::kappa_at`].
    pub fn coefficients(&self) -> FnCoefficients {
        let me = *self;
        FnCoefficients::new(|_| 1.0, move |x| me.kappa_at(x))
    }

    fn phase(&self, x: Point, t: f64) -> f64 {
        t - self.delay - x[0] * self.direction[0] - x[1] * self.direction[1]
    }

    fn jet(&self, x: Point, t: f64) -> Jet {
        self.interior_signal.jet(self.phase(x, t))
    }

    /// Exact interior field `u = s(t − t₀ − x·d)`.
    pub fn interior(&self, x: Point, t: f64) -> f64 {
        self.jet(x, t).v
    }

    pub fn interior_grad(&self, x: Point, t: f64) -> [f64; 2] {
        let d = self.jet(x, t).d;
        [-self.direction[0] * d, -self.direction[1] * d]
    }

    pub fn interior_dt(&self, x: Point, t: f64) -> f64 {
        self.jet(x, t).d
    }

    /// `f = ü − div(κ∇u) = (1 − d·κd) s'' + (∇·κd) s'`.
    pub fn body_force(&self, x: Point, t: f64) -> f64 {
        let j = self.jet(x, t);
        let k = self.kappa_at(x);
        let d = self.direction;
        let dkd = d[0] * (k[0][0] * d[0] + k[0][1] * d[1]) + d[1] * (k[1][0] * d[0] + k[1][1] * d[1]);
        (1.0 - dkd) * j.dd + self.div_kappa_d(x) * j.d
    }

    /// Exact exterior field.
    pub fn exterior(&self, x: Point, t: f64) -> Result<f64> {
        Ok(cylindrical_wave(&self.exterior_signal, x[0].hypot(x[1]), t)?.0)
    }

    pub fn exterior_grad(&self, x: Point, t: f64) -> Result<[f64; 2]> {
        let r = x[0].hypot(x[1]);
        let (_, dr) = cylindrical_wave(&self.exterior_signal, r, t)?;
        Ok([dr * x[0] / r, dr * x[1] / r])
    }

    /// `λ = ∂_ν u₊` with `ν` pointing out of the obstacle.
    pub fn lambda(&self, x: Point, nu: Point, t: f64) -> Result<f64> {
        let g = self.exterior_grad(x, t)?;
        Ok(g[0] * nu[0] + g[1] * nu[1])
    }

    /// `φ = γ⁺u₊`.
    pub fn phi(&self, x: Point, t: f64) -> Result<f64> {
        self.exterior(x, t)
    }

    /// `β₀ = γu − γ⁺u₊`.
    pub fn beta0(&self, x: Point, t: f64) -> Result<f64> {
        Ok(self.interior(x, t) - self.exterior(x, t)?)
    }

    /// `β₁ = ∂_{κ,ν}u − ∂_ν u₊`.
    pub fn beta1(&self, x: Point, nu: Point, t: f64) -> Result<f64> {
        let g = self.interior_grad(x, t);
        let k = self.kappa_at(x);
        let kg = [k[0][0] * g[0] + k[0][1] * g[1], k[1][0] * g[0] + k[1][1] * g[1]];
        Ok(kg[0] * nu[0] + kg[1] * nu[1] - self.lambda(x, nu, t)?)
    }

    pub fn body_force_fn(&self) -> BodyForce {
        let me = *self;
        Arc::new(move |x, t| me.body_force(x, t))
    }

    /// Projected data `β₀ → Y_h`, `β₁ → X_h` at every time step.
    pub fn boundary_data(&self, fem: &FemSystem, grid: &TimeGrid, exec: Execution) -> Result<BoundaryData> {
        // Evaluation errors only come from r = 0, which cannot lie on Γ of a
        // mesh surrounding the source, but are still reported.
        let bad = OnceLock::new();
        let data = sample_boundary_data(
            fem,
            grid,
            |x, t| {
                self.beta0(x, t).unwrap_or_else(|e| {
                    let _ = bad.set(e.to_string());
                    0.0
                })
            },
            |x, nu, t| {
                self.beta1(x, nu, t).unwrap_or_else(|e| {
                    let _ = bad.set(e.to_string());
                    0.0
                })
            },
            exec,
        )?;
        match bad.into_inner() {
            Some(msg) => Err(Error::InvalidInput(msg)),
            None => Ok(data),
        }
    }

    /// The full scattering problem on `fem`.
    pub fn problem(&self, fem: Arc<FemSystem>, grid: TimeGrid, points: Vec<Point>, exec: Execution) -> Result<ScatteringProblem> {
        let (beta0, beta1) = self.boundary_data(&fem, &grid, exec)?;
        Ok(ScatteringProblem {
            fem,
            grid,
            beta0,
            beta1,
            body_force: Some(self.body_force_fn()),
            observation_points: points,
        })
    }
}
