use crate::fem::FemSystem;
use crate::linalg::{CsrMatrix, EnvelopeLdlt};
use crate::Result;

/// Trapezoidal-rule stepper for `M ü + S u = g`, written as the two-step
/// recursion obtained from `∂_k² = (δ(ζ)/k)²` after multiplication by
/// `α_k² = ((1 + ζ)/2)²`:
///
/// `(4/k²) M (u_n − 2u_{n−1} + u_{n−2}) + S (u_n + 2u_{n−1} + u_{n−2})
///   = g_n + 2g_{n−1} + g_{n−2}`.
pub struct InteriorStepper {
    k: f64,
    mass: CsrMatrix<f64>,
    stiffness: CsrMatrix<f64>,
    factor: EnvelopeLdlt<f64>,
}

impl InteriorStepper {
    pub fn new(fem: &FemSystem, k: f64) -> Result<Self> {
        Self::from_matrices(fem.mass.clone(), fem.stiffness.clone(), k)
    }

    pub fn from_matrices(mass: CsrMatrix<f64>, stiffness: CsrMatrix<f64>, k: f64) -> Result<Self> {
        let a = CsrMatrix::linear_combination(4.0 / (k * k), &mass, 1.0, &stiffness);
        Ok(InteriorStepper {
            k,
            factor: EnvelopeLdlt::new(&a)?,
            mass,
            stiffness,
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// `A⁻¹ b` with `A = (4/k²) M + S`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.factor.solve(b)
    }

    /// The history part of the right-hand side:
    /// `(4/k²) M (2u_{n−1} − u_{n−2}) − S (2u_{n−1} + u_{n−2})`.
    pub fn history(&self, u1: &[f64], u2: &[f64]) -> Vec<f64> {
        let c = 4.0 / (self.k * self.k);
        let a: Vec<f64> = u1.iter().zip(u2).map(|(x, y)| 2.0 * x - y).collect();
        let b: Vec<f64> = u1.iter().zip(u2).map(|(x, y)| 2.0 * x + y).collect();
        let ma = self.mass.mul_vec(&a);
        let sb = self.stiffness.mul_vec(&b);
        ma.iter().zip(&sb).map(|(x, y)| c * x - y).collect()
    }

    /// One step: `u_n` from `u_{n−1}`, `u_{n−2}` and the averaged load
    /// `g_n + 2g_{n−1} + g_{n−2}`.
    pub fn step(&self, u1: &[f64], u2: &[f64], load: &[f64]) -> Vec<f64> {
        let mut rhs = self.history(u1, u2);
        rhs.iter_mut().zip(load).for_each(|(r, l)| *r += l);
        self.solve(&rhs)
    }

    /// Runs the recursion from zero history for loads `g_0..g_N`.
    pub fn run(&self, loads: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = loads.first().map_or(0, |g| g.len());
        let zero = vec![0.0; n];
        let mut u: Vec<Vec<f64>> = Vec::with_capacity(loads.len());
        for i in 0..loads.len() {
            let avg = averaged(loads, i);
            let u1 = if i >= 1 { &u[i - 1] } else { &zero };
            let u2 = if i >= 2 { &u[i - 2] } else { &zero };
            let next = self.step(u1, u2, &avg);
            u.push(next);
        }
        u
    }

    /// `E = ½‖(u_n − u_{n−1})/k‖²_M + ½‖(u_n + u_{n−1})/2‖²_S`, conserved
    /// exactly by the unforced recursion.
    pub fn energy(&self, un: &[f64], un1: &[f64]) -> f64 {
        let d: Vec<f64> = un.iter().zip(un1).map(|(a, b)| (a - b) / self.k).collect();
        let a: Vec<f64> = un.iter().zip(un1).map(|(a, b)| 0.5 * (a + b)).collect();
        0.5 * self.mass.quadratic_form(&d) + 0.5 * self.stiffness.quadratic_form(&a)
    }
}

/// `g_n + 2g_{n−1} + g_{n−2}` with zero extension for negative indices.
pub(crate) fn averaged(g: &[Vec<f64>], n: usize) -> Vec<f64> {
    let mut out = g[n].clone();
    if n >= 1 {
        out.iter_mut().zip(&g[n - 1]).for_each(|(o, x)| *o += 2.0 * x);
    }
    if n >= 2 {
        out.iter_mut().zip(&g[n - 2]).for_each(|(o, x)| *o += x);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::ConstantCoefficients;
    use crate::mesh::{extract_boundary, generate_square_mesh};

    fn fem() -> FemSystem {
        let m = generate_square_mesh(1);
        let b = extract_boundary(&m).unwrap();
        FemSystem::assemble(&m, &b, &ConstantCoefficients { c: 1.0, kappa: [[2.0, 0.3], [0.3, 1.0]] }, 1).unwrap()
    }

    #[test]
    fn unforced_recursion_conserves_energy() {
        let f = fem();
        let st = InteriorStepper::new(&f, 0.05).unwrap();
        let n = f.n_dofs();
        let mut u2: Vec<f64> = (0..n).map(|i| ((i * 7) % 11) as f64 / 11.0 - 0.5).collect();
        let mut u1: Vec<f64> = u2.iter().map(|x| 0.9 * x).collect();
        let e0 = st.energy(&u1, &u2);
        let zero = vec![0.0; n];
        for _ in 0..200 {
            let u = st.step(&u1, &u2, &zero);
            u2 = std::mem::replace(&mut u1, u);
        }
        let e = st.energy(&u1, &u2);
        assert!(((e - e0) / e0).abs() < 1e-10, "{e} vs {e0}");
    }

    #[test]
    fn recursion_matches_convolution_quadrature() {
        use crate::coupled::FemResolvent;
        use crate::cq::{all_steps_at_once, Contour, TimeGrid};
        use crate::parallel::Execution;
        use crate::C64;
        let f = fem();
        let grid = TimeGrid::new(0.1, 30).unwrap();
        let st = InteriorStepper::new(&f, grid.k()).unwrap();
        let loads: Vec<Vec<f64>> = grid
            .times()
            .iter()
            .map(|t| (0..f.n_dofs()).map(|i| (t * t * (1.0 + i as f64 * 0.01)).sin()).collect())
            .collect();
        let u = st.run(&loads);
        let g: Vec<Vec<C64>> = loads.iter().map(|v| v.iter().map(|&x| C64::new(x, 0.0)).collect()).collect();
        let cq = all_steps_at_once(&FemResolvent::new(&f), &grid, &Contour::for_all_steps(&grid), &g, Execution::Parallel)
            .unwrap();
        let scale = u.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
        for (a, b) in u.iter().zip(&cq.samples) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y.re).abs() < 1e-9 * scale);
            }
        }
    }
}
