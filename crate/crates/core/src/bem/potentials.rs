use super::kernel::kernel_and_derivative;
use super::pairs::NEGLIGIBLE_DECAY;
use super::{BoundarySpaces, SpaceKind};
use crate::mesh::BoundaryMesh;
use crate::parallel::{try_map_indexed, Execution};
use crate::quadrature::Rule1d;
use crate::{Error, Point, Result, C64};
use nalgebra::DMatrix;

#[derive(Clone, Copy, Debug, Default)]
pub struct PotentialOptions {
    /// Evaluate even closer to Γ than one panel length. Accuracy then
    /// degrades gracefully with the distance; used by jump-relation checks.
    pub allow_near: bool,
    pub exec: Execution,
}

/// Rows of the single- and double-layer potentials at a set of points:
/// `(S(s)λ)(x_i) = Σ_j single[i, j] λ_j` with `λ ∈ X_h`, and likewise
/// `double` acting on `Y_h` coefficients.
#[derive(Clone, Debug)]
pub struct PotentialMatrices {
    pub single: DMatrix<C64>,
    pub double: DMatrix<C64>,
}

impl PotentialMatrices {
    /// `(D(s)φ − S(s)λ)(x_i)`.
    pub fn apply(&self, lambda: &[C64], phi: &[C64]) -> Vec<C64> {
        (0..self.single.nrows())
            .map(|i| {
                let mut acc = C64::new(0.0, 0.0);
                for (j, l) in lambda.iter().enumerate() {
                    acc -= self.single[(i, j)] * l;
                }
                for (j, p) in phi.iter().enumerate() {
                    acc += self.double[(i, j)] * p;
                }
                acc
            })
            .collect()
    }
}

const MAX_DEPTH: usize = 48;

fn segment_distance(x: Point, a: Point, b: Point) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let l2 = d[0] * d[0] + d[1] * d[1];
    let t = (((x[0] - a[0]) * d[0] + (x[1] - a[1]) * d[1]) / l2).clamp(0.0, 1.0);
    let dx = x[0] - a[0] - t * d[0];
    let dy = x[1] - a[1] - t * d[1];
    (dx * dx + dy * dy).sqrt()
}

fn check_point(bmesh: &BoundaryMesh, x: Point, allow_near: bool) -> Result<()> {
    let (d, panel) = bmesh.distance(x);
    let too_close = if allow_near { !(d > 0.0) } else { d < bmesh.length(panel) };
    if too_close || !d.is_finite() {
        return Err(Error::NearField {
            x: x[0],
            y: x[1],
            panel,
            distance: d,
        });
    }
    Ok(())
}

/// One row of each potential matrix, by panelwise Gauss quadrature on pieces
/// bisected until each is at most half its distance from `x` and resolves
/// the oscillation of the kernel.
fn potential_row(bmesh: &BoundaryMesh, spaces: &BoundarySpaces, s: C64, x: Point, rule: &Rule1d) -> (Vec<C64>, Vec<C64>) {
    let mut single = vec![C64::new(0.0, 0.0); spaces.dim_x()];
    let mut double = vec![C64::new(0.0, 0.0); spaces.dim_y()];
    let smod = s.norm();
    let mut stack = Vec::new();
    for p in 0..bmesh.n_panels() {
        let (a, b) = bmesh.endpoints(p);
        let h = bmesh.length(p);
        let nu = bmesh.normal(p);
        let xd = spaces.x_dofs(p);
        let yd = spaces.y_dofs(p);
        let at = |t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
        stack.clear();
        stack.push((0.0, 1.0, 0usize));
        while let Some((t0, t1, depth)) = stack.pop() {
            let len = h * (t1 - t0);
            let dist = segment_distance(x, at(t0), at(t1));
            if s.re * dist > NEGLIGIBLE_DECAY {
                continue;
            }
            if depth < MAX_DEPTH && (len > 0.5 * dist || len * smod > 4.0) {
                let tm = 0.5 * (t0 + t1);
                stack.push((tm, t1, depth + 1));
                stack.push((t0, tm, depth + 1));
                continue;
            }
            for (&r, &w) in rule.points.iter().zip(&rule.weights) {
                let t = t0 + (t1 - t0) * r;
                let y = at(t);
                let dx = [y[0] - x[0], y[1] - x[1]];
                let dist = (dx[0] * dx[0] + dx[1] * dx[1]).sqrt();
                let (g, dg) = kernel_and_derivative(dist, s);
                let wt = w * len;
                let kd = dg * ((dx[0] * nu[0] + dx[1] * nu[1]) / dist) * wt;
                let gw = g * wt;
                for (d, phi) in xd.iter().zip(spaces.basis(SpaceKind::X, t)) {
                    single[*d] += gw * phi;
                }
                for (d, psi) in yd.iter().zip(spaces.basis(SpaceKind::Y, t)) {
                    double[*d] += kd * psi;
                }
            }
        }
    }
    (single, double)
}

/// Single- and double-layer potential matrices at `points`.
pub fn potential_matrices(
    bmesh: &BoundaryMesh,
    spaces: &BoundarySpaces,
    s: C64,
    points: &[Point],
    opts: PotentialOptions,
) -> Result<PotentialMatrices> {
    if !(s.re > 0.0) {
        return Err(Error::InvalidInput(format!("potentials need Re s > 0, got {s}")));
    }
    for &x in points {
        check_point(bmesh, x, opts.allow_near)?;
    }
    let rule = Rule1d::gauss(10);
    let rows = try_map_indexed(opts.exec, points.len(), |i| -> Result<_> {
        let (sr, dr) = potential_row(bmesh, spaces, s, points[i], &rule);
        if sr.iter().chain(&dr).any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidInput(format!("non-finite potential at point {i}")));
        }
        Ok((sr, dr))
    })?;
    let n = points.len();
    let mut single = DMatrix::from_element(n, spaces.dim_x(), C64::new(0.0, 0.0));
    let mut double = DMatrix::from_element(n, spaces.dim_y(), C64::new(0.0, 0.0));
    for (i, (sr, dr)) in rows.into_iter().enumerate() {
        for (j, v) in sr.into_iter().enumerate() {
            single[(i, j)] = v;
        }
        for (j, v) in dr.into_iter().enumerate() {
            double[(i, j)] = v;
        }
    }
    Ok(PotentialMatrices { single, double })
}

/// `(D(s)φ − S(s)λ)(x)` at every point, with `λ ∈ X_h`, `φ ∈ Y_h`.
pub fn evaluate_potentials(
    bmesh: &BoundaryMesh,
    spaces: &BoundarySpaces,
    s: C64,
    lambda: &[C64],
    phi: &[C64],
    points: &[Point],
    opts: PotentialOptions,
) -> Result<Vec<C64>> {
    if lambda.len() != spaces.dim_x() || phi.len() != spaces.dim_y() {
        return Err(Error::InvalidInput(format!(
            "density sizes ({}, {}) do not match spaces ({}, {})",
            lambda.len(),
            phi.len(),
            spaces.dim_x(),
            spaces.dim_y()
        )));
    }
    Ok(potential_matrices(bmesh, spaces, s, points, opts)?.apply(lambda, phi))
}
