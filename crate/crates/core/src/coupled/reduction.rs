use super::operators::{boundary_matrix, schur_term, FemResolvent};
use super::stepper::InteriorStepper;
use super::{ScatteringProblem, SolutionTrace, SolverOptions};
use crate::bem::{assemble_block, potential_matrices, PotentialOptions};
use crate::cq::{inverse_scaled_transform, map_frequencies, scaled_transform, Contour};
use crate::linalg::DenseLu;
use crate::parallel::Execution;
use crate::{Error, Result, C64};

fn complexify(v: &[Vec<f64>]) -> Vec<Vec<C64>> {
    v.iter().map(|x| x.iter().map(|&r| C64::new(r, 0.0)).collect()).collect()
}

/// Real parts and the largest discarded imaginary part relative to the
/// largest modulus.
fn real_parts(v: &[Vec<C64>]) -> (Vec<Vec<f64>>, f64) {
    let (mut im, mut all) = (0.0f64, 0.0f64);
    let re = v
        .iter()
        .map(|x| {
            x.iter()
                .map(|z| {
                    im = im.max(z.im.abs());
                    all = all.max(z.norm());
                    z.re
                })
                .collect()
        })
        .collect();
    (re, if all > 0.0 { im / all } else { 0.0 })
}

fn exterior_spectra(problem: &ScatteringProblem, contour: &Contour, joined: &[Vec<C64>], exec: Execution) -> Result<Vec<Vec<C64>>> {
    let fem = &*problem.fem;
    let nx = fem.dim_x();
    let xhat = scaled_transform(contour, joined)?;
    let popts = PotentialOptions {
        allow_near: false,
        exec: Execution::Sequential,
    };
    let (ext, _) = map_frequencies(contour, problem.grid.k(), true, exec, |l, s| {
        let p = potential_matrices(&fem.bmesh, &fem.spaces, s, &problem.observation_points, popts)?;
        Ok(p.apply(&xhat[l][..nx], &xhat[l][nx..]))
    })?;
    Ok(ext)
}

pub(crate) fn exterior_with_residue(
    problem: &ScatteringProblem,
    lambda: &[Vec<f64>],
    phi: &[Vec<f64>],
    opts: &SolverOptions,
) -> Result<(Vec<Vec<f64>>, f64)> {
    let n = problem.grid.n_samples();
    if problem.observation_points.is_empty() {
        return Ok((vec![Vec::new(); n], 0.0));
    }
    if lambda.len() != n || phi.len() != n {
        return Err(Error::InvalidInput("density sequences do not match the time grid".into()));
    }
    let joined: Vec<Vec<C64>> = lambda
        .iter()
        .zip(phi)
        .map(|(l, p)| l.iter().chain(p).map(|&r| C64::new(r, 0.0)).collect())
        .collect();
    let contour = opts.all_steps_contour(&problem.grid);
    let ext = exterior_spectra(problem, &contour, &joined, opts.exec)?;
    Ok(real_parts(&inverse_scaled_transform(&contour, &ext, n)?))
}

/// The exterior field `u₊(x_j, t_n) = (D(∂_k)φ − S(∂_k)λ)(x_j, t_n)` at the
/// observation points of `problem`, from the boundary densities.
pub fn postprocess_exterior(
    problem: &ScatteringProblem,
    lambda: &[Vec<f64>],
    phi: &[Vec<f64>],
    opts: &SolverOptions,
) -> Result<Vec<Vec<f64>>> {
    Ok(exterior_with_residue(problem, lambda, phi, opts)?.0)
}

/// Reduction to the boundary. With `w = F(∂_k)⁻¹(Γᵗβ₁ + f)` computed by
/// time stepping, the boundary unknowns solve `B(∂_k)[λ; φ] = [Iβ₀ − Γw; 0]`,
/// which is decoupled into independent frequency-domain solves. The
/// interior field is then recovered by time stepping with `Γᵗ(β₁ + λ) + f`.
pub fn solve_reduction_to_boundary(problem: &ScatteringProblem, opts: &SolverOptions) -> Result<SolutionTrace> {
    problem.validate()?;
    let fem = &*problem.fem;
    let grid = problem.grid;
    let (nx, ny) = (fem.dim_x(), fem.dim_y());
    let n_samples = grid.n_samples();
    let contour = opts.all_steps_contour(&grid);

    let stepper = InteriorStepper::new(fem, grid.k())?;
    let loads = problem.loads();
    let g1: Vec<Vec<f64>> = problem
        .beta1
        .iter()
        .zip(&loads)
        .map(|(b, f)| fem.gamma_t(b).iter().zip(f).map(|(x, y)| x + y).collect())
        .collect();
    let w = stepper.run(&g1);

    let rhs: Vec<Vec<f64>> = problem
        .beta0
        .iter()
        .zip(&w)
        .map(|(b0, wn)| {
            let mut r: Vec<f64> = fem.ih.mul_vec(b0).iter().zip(fem.gamma.mul_vec(wn)).map(|(a, b)| a - b).collect();
            r.resize(nx + ny, 0.0);
            r
        })
        .collect();
    let rhat = scaled_transform(&contour, &complexify(&rhs))?;

    let resolvent = FemResolvent::new(fem);
    let points = &problem.observation_points;
    let popts = PotentialOptions {
        allow_near: false,
        exec: Execution::Sequential,
    };
    let (yhat, solves) = map_frequencies(&contour, grid.k(), true, opts.exec, |l, s| {
        let f = resolvent.factorize(s)?;
        let (schur, _) = schur_term(fem, &f);
        let block = assemble_block(&fem.bmesh, &fem.spaces, s, Execution::Sequential)?;
        let lu = DenseLu::new(boundary_matrix(fem, &block, &schur, opts.sign))?;
        let mut x = lu.solve(&rhat[l]);
        if !points.is_empty() {
            let p = potential_matrices(&fem.bmesh, &fem.spaces, s, points, popts)?;
            let e = p.apply(&x[..nx], &x[nx..]);
            x.extend(e);
        }
        Ok(x)
    })?;
    let (joined, residue) = real_parts(&inverse_scaled_transform(&contour, &yhat, n_samples)?);
    let lambda: Vec<Vec<f64>> = joined.iter().map(|x| x[..nx].to_vec()).collect();
    let phi: Vec<Vec<f64>> = joined.iter().map(|x| x[nx..nx + ny].to_vec()).collect();
    let exterior: Vec<Vec<f64>> = joined.iter().map(|x| x[nx + ny..].to_vec()).collect();

    let g2: Vec<Vec<f64>> = g1
        .iter()
        .zip(&lambda)
        .map(|(g, l)| g.iter().zip(fem.gamma_t(l)).map(|(a, b)| a + b).collect())
        .collect();
    let u = stepper.run(&g2);
    Ok(SolutionTrace {
        u,
        lambda,
        phi,
        exterior,
        imaginary_residue: residue,
        frequency_solves: solves,
    })
}
