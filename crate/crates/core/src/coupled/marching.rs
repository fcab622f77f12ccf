use super::operators::BoundaryMemory;
use super::stepper::{averaged, InteriorStepper};
use super::{
    reduction::exterior_with_residue, ScatteringProblem, SolutionTrace, SolverOptions, MARCHING_MAX_BOUNDARY_DOFS,
    MARCHING_MAX_STEPS,
};
use crate::cq::cq_weights;
use crate::linalg::DenseLu;
use crate::{Error, Result, C64};
use nalgebra::{DMatrix, DVector};

/// Rough ceiling on the bytes held while generating and storing the
/// boundary weights.
const MARCHING_MAX_BYTES: usize = 2 << 30;

fn check_capacity(problem: &ScatteringProblem, oversampling: usize) -> Result<()> {
    let (nx, ny) = (problem.fem.dim_x(), problem.fem.dim_y());
    let n = problem.grid.n_steps();
    if ny > MARCHING_MAX_BOUNDARY_DOFS {
        return Err(Error::HistoryCapacity(format!(
            "dim Y_h = {ny} exceeds {MARCHING_MAX_BOUNDARY_DOFS}; use reduction to the boundary"
        )));
    }
    if n > MARCHING_MAX_STEPS {
        return Err(Error::HistoryCapacity(format!(
            "{n} steps exceed {MARCHING_MAX_STEPS}; use reduction to the boundary"
        )));
    }
    let nb = nx + ny;
    let bytes = (oversampling + 1) * (n + 1) * nb * nb * 16;
    if bytes > MARCHING_MAX_BYTES {
        return Err(Error::HistoryCapacity(format!(
            "boundary weights need about {} MiB",
            bytes >> 20
        )));
    }
    Ok(())
}

/// Marching on in time. Each step solves the interior recursion and the
/// boundary equations together through a Schur complement on the boundary
/// unknowns; the boundary memory enters through stored convolution weights
/// of `[[V, −K], [Kᵗ, W]]`.
pub fn solve_marching(problem: &ScatteringProblem, opts: &SolverOptions) -> Result<SolutionTrace> {
    problem.validate()?;
    let fem = &*problem.fem;
    let grid = problem.grid;
    let contour = opts.weight_contour(&grid);
    check_capacity(problem, contour.len().div_ceil(grid.n_samples()))?;
    let (nx, ny) = (fem.dim_x(), fem.dim_y());
    let nb = nx + ny;
    let k = grid.k();

    let memory = BoundaryMemory { fem, sign: opts.sign };
    let weights = cq_weights(&memory, &grid, &contour, opts.exec)?;
    let tails: Vec<DMatrix<f64>> = weights.real_parts();

    let stepper = InteriorStepper::new(fem, k)?;
    // A⁻¹Γᵗ, one column per X_h dof.
    let mut g_cols = Vec::with_capacity(nx);
    let mut e = vec![0.0; nx];
    for j in 0..nx {
        e[j] = 1.0;
        g_cols.push(stepper.solve(&fem.gamma_t(&e)));
        e[j] = 0.0;
    }
    // B(2/k) = E_0 + [[ΓA⁻¹Γᵗ, −½I], [½Iᵗ, 0]].
    let ih = fem.ih.to_dense();
    let mut b0 = tails[0].clone();
    for (j, col) in g_cols.iter().enumerate() {
        for (i, v) in fem.gamma.mul_vec(col).into_iter().enumerate() {
            b0[(i, j)] += v;
        }
    }
    for i in 0..nx {
        for j in 0..ny {
            b0[(i, nx + j)] -= 0.5 * ih[(i, j)];
            b0[(nx + j, i)] += 0.5 * ih[(i, j)];
        }
    }
    let lu = DenseLu::new(b0.map(|v| C64::new(v, 0.0)))
        .map_err(|e| Error::Singular(format!("boundary matrix at s = 2/k: {e}")))?;

    let loads = problem.loads();
    let n_samples = grid.n_samples();
    let zero_u = vec![0.0; fem.n_dofs()];
    let zero_x = vec![0.0; nx];
    let mut u: Vec<Vec<f64>> = Vec::with_capacity(n_samples);
    let mut x: Vec<DVector<f64>> = Vec::with_capacity(n_samples);
    for n in 0..n_samples {
        let lam = |m: usize| -> Vec<f64> {
            if n >= m {
                x[n - m].rows(0, nx).iter().copied().collect()
            } else {
                zero_x.clone()
            }
        };
        let (l1, l2) = (lam(1), lam(2));
        let mut mu = averaged(&problem.beta1, n);
        mu.iter_mut()
            .zip(l1.iter().zip(&l2))
            .for_each(|(m, (a, b))| *m += 2.0 * a + b);
        let u1 = if n >= 1 { &u[n - 1] } else { &zero_u };
        let u2 = if n >= 2 { &u[n - 2] } else { &zero_u };
        let mut r = stepper.history(u1, u2);
        let gt = fem.gamma_t(&mu);
        let load = averaged(&loads, n);
        r.iter_mut().zip(gt.iter().zip(&load)).for_each(|(a, (b, c))| *a += b + c);
        let z = stepper.solve(&r);

        let mut rhs = DVector::zeros(nb);
        let ib0 = fem.ih.mul_vec(&problem.beta0[n]);
        let gz = fem.gamma.mul_vec(&z);
        for i in 0..nx {
            rhs[i] = ib0[i] - gz[i];
        }
        for m in 1..=n {
            rhs -= &tails[m] * &x[n - m];
        }
        let rc: Vec<C64> = rhs.iter().map(|&v| C64::new(v, 0.0)).collect();
        let sol = DVector::from_iterator(nb, lu.solve(&rc).into_iter().map(|z| z.re));
        let mut un = z;
        for (j, col) in g_cols.iter().enumerate() {
            let lj = sol[j];
            if lj != 0.0 {
                un.iter_mut().zip(col).for_each(|(a, b)| *a += lj * b);
            }
        }
        u.push(un);
        x.push(sol);
    }

    let lambda: Vec<Vec<f64>> = x.iter().map(|v| v.rows(0, nx).iter().copied().collect()).collect();
    let phi: Vec<Vec<f64>> = x.iter().map(|v| v.rows(nx, ny).iter().copied().collect()).collect();
    let (exterior, residue) = exterior_with_residue(problem, &lambda, &phi, opts)?;
    Ok(SolutionTrace {
        u,
        lambda,
        phi,
        exterior,
        imaginary_residue: weights.imaginary_residue().max(residue),
        frequency_solves: 0,
    })
}

