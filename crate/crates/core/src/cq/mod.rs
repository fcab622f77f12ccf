//! Trapezoidal-rule convolution quadrature.
//!
//! A causal convolution `y = f ∗ g` with Laplace transform `F(s)` is
//! discretized on a uniform grid as `y_n = Σ_{m ≤ n} ω_m g_{n−m}`, where the
//! weights are the Taylor coefficients of `F(δ(ζ)/k)` and
//! `δ(ζ) = 2(1 − ζ)/(1 + ζ)`. Weights are computed by a scaled FFT over the
//! contour `|ζ| = ρ`; the same transform diagonalizes the discrete
//! convolution, which is the basis of the all-steps solver.

mod transfer;

pub use transfer::{Block, Dense, Inverse, Product, Scalar, Sum, TransferFunction};

use crate::linalg::DenseLu;
use crate::parallel::{try_map_indexed, Execution};
use crate::{Error, Result, C64};
use nalgebra::{DMatrix, DVector};
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// `δ(ζ) = 2(1 − ζ)/(1 + ζ)`.
pub fn trapezoidal_delta(zeta: C64) -> Result<C64> {
    let den = 1.0 + zeta;
    if den.norm() == 0.0 {
        return Err(Error::InvalidInput("δ(ζ) has a pole at ζ = −1".into()));
    }
    Ok(2.0 * (1.0 - zeta) / den)
}

/// Uniform grid `t_n = n k`, `n = 0..=N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    k: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(k: f64, n_steps: usize) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidInput(format!("time step must be positive, got {k}")));
        }
        if n_steps == 0 {
            return Err(Error::InvalidInput("at least one time step is required".into()));
        }
        Ok(TimeGrid { k, n_steps })
    }

    /// `N` steps of size `T/N`.
    pub fn from_final_time(t_final: f64, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidInput("at least one time step is required".into()));
        }
        Self::new(t_final / n_steps as f64, n_steps)
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of samples, `N + 1`.
    pub fn n_samples(&self) -> usize {
        self.n_steps + 1
    }

    pub fn t(&self, n: usize) -> f64 {
        n as f64 * self.k
    }

    pub fn final_time(&self) -> f64 {
        self.t(self.n_steps)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|n| self.t(n)).collect()
    }
}

/// `ε^{1/(2(N+1))}`, balancing aliasing against round-off for a contour
/// with `N + 1` nodes.
pub fn default_radius(n_steps: usize) -> f64 {
    f64::EPSILON.powf(1.0 / (2.0 * (n_steps + 1) as f64))
}

/// The sampling contour: `len` equispaced points on `|ζ| = radius`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contour {
    radius: f64,
    len: usize,
}

impl Contour {
    /// `N + 1` points at the default radius.
    pub fn standard(grid: &TimeGrid) -> Self {
        Contour {
            radius: default_radius(grid.n_steps()),
            len: grid.n_samples(),
        }
    }

    /// Contour used for weight generation unless one is given explicitly:
    /// fourfold oversampling, which brings the weights to about `1e-12`
    /// relative accuracy.
    pub fn for_weights(grid: &TimeGrid) -> Self {
        Self::oversampled(grid, 4).expect("valid oversampling")
    }

    /// Contour used by the all-steps solvers unless one is given explicitly:
    /// twofold oversampling, about `1e-10` relative accuracy at twice the
    /// cost of the plain `N + 1` point contour (about `1e-8`).
    pub fn for_all_steps(grid: &TimeGrid) -> Self {
        Self::oversampled(grid, 2).expect("valid oversampling")
    }

    /// `N + 1` points at a given radius.
    pub fn with_radius(grid: &TimeGrid, radius: f64) -> Result<Self> {
        Self::new(radius, grid.n_samples(), grid)
    }

    /// `factor · (N + 1)` points at radius `ε^{1/(len + N)}`. Aliasing then
    /// decays like `ρ^{len}` while round-off grows like `ε ρ^{−N}`, so the
    /// attainable accuracy improves from `ε^{1/2}` to `ε^{len/(len+N)}`.
    pub fn oversampled(grid: &TimeGrid, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidInput("oversampling factor must be positive".into()));
        }
        let len = factor * grid.n_samples();
        let radius = f64::EPSILON.powf(1.0 / (len + grid.n_steps()) as f64);
        Self::new(radius, len, grid)
    }

    pub fn new(radius: f64, len: usize, grid: &TimeGrid) -> Result<Self> {
        if !(radius > 0.0 && radius < 1.0) {
            return Err(Error::InvalidInput(format!("contour radius must lie in (0, 1), got {radius}")));
        }
        if len < grid.n_samples() {
            return Err(Error::InvalidInput(format!(
                "contour needs at least N + 1 = {} points, got {len}",
                grid.n_samples()
            )));
        }
        Ok(Contour { radius, len })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn zeta(&self, l: usize) -> C64 {
        C64::from_polar(1.0, 2.0 * PI * l as f64 / self.len as f64)
    }

    /// `s_l = δ(ρ ζ_l)/k`.
    pub fn frequency(&self, l: usize, k: f64) -> C64 {
        trapezoidal_delta(self.radius * self.zeta(l)).expect("radius < 1 keeps ζ away from −1") / k
    }

    pub fn frequencies(&self, k: f64) -> Vec<C64> {
        (0..self.len).map(|l| self.frequency(l, k)).collect()
    }

    /// Indices that have to be solved when data and operator are real:
    /// `0..=len/2`; the rest follow by conjugation.
    pub fn independent_indices(&self, symmetric: bool) -> usize {
        if symmetric {
            self.len / 2 + 1
        } else {
            self.len
        }
    }
}

/// `ĝ_l = Σ_n ρ^n g_n ζ_l^n` for vector-valued samples `g[n]`.
pub fn scaled_transform(contour: &Contour, samples: &[Vec<C64>]) -> Result<Vec<Vec<C64>>> {
    let l = contour.len();
    if samples.len() > l {
        return Err(Error::InvalidInput(format!("{} samples exceed contour length {l}", samples.len())));
    }
    let dim = samples.first().map_or(0, |v| v.len());
    if samples.iter().any(|v| v.len() != dim) {
        return Err(Error::InvalidInput("samples of unequal length".into()));
    }
    let fft = FftPlanner::new().plan_fft_inverse(l);
    let mut out = vec![vec![C64::new(0.0, 0.0); dim]; l];
    let mut buf = vec![C64::new(0.0, 0.0); l];
    for i in 0..dim {
        let mut scale = 1.0;
        buf.iter_mut().for_each(|b| *b = C64::new(0.0, 0.0));
        for (n, g) in samples.iter().enumerate() {
            buf[n] = g[i] * scale;
            scale *= contour.radius();
        }
        fft.process(&mut buf);
        for (o, b) in out.iter_mut().zip(&buf) {
            o[i] = *b;
        }
    }
    Ok(out)
}

/// `y_n = ρ^{−n}/L Σ_l ŷ_l ζ_l^{−n}` for `n < n_out`.
pub fn inverse_scaled_transform(contour: &Contour, spectra: &[Vec<C64>], n_out: usize) -> Result<Vec<Vec<C64>>> {
    let l = contour.len();
    if spectra.len() != l || n_out > l {
        return Err(Error::InvalidInput(format!(
            "{} spectra for a contour of length {l}, {n_out} samples requested",
            spectra.len()
        )));
    }
    let dim = spectra.first().map_or(0, |v| v.len());
    let fft = FftPlanner::new().plan_fft_forward(l);
    let mut out = vec![vec![C64::new(0.0, 0.0); dim]; n_out];
    let mut buf = vec![C64::new(0.0, 0.0); l];
    let inv_radius = 1.0 / contour.radius();
    for i in 0..dim {
        for (b, s) in buf.iter_mut().zip(spectra) {
            *b = s[i];
        }
        fft.process(&mut buf);
        let mut scale = 1.0 / l as f64;
        for (n, o) in out.iter_mut().enumerate() {
            o[i] = buf[n] * scale;
            scale *= inv_radius;
        }
    }
    Ok(out)
}

fn frequency_error(index: usize, s: C64, e: Error) -> Error {
    match e {
        e @ Error::FrequencySolve { .. } => e,
        other => Error::FrequencySolve {
            index,
            s,
            message: other.to_string(),
        },
    }
}

/// Evaluates `f(l, s_l)` on the contour. With `symmetric`, only indices
/// `0..=L/2` are evaluated and the others are filled with `conj` of their
/// mirror image. Returns the values and the number of evaluations.
pub fn map_frequencies<F>(
    contour: &Contour,
    k: f64,
    symmetric: bool,
    exec: Execution,
    f: F,
) -> Result<(Vec<Vec<C64>>, usize)>
where
    F: Fn(usize, C64) -> Result<Vec<C64>> + Sync + Send,
{
    let l = contour.len();
    let count = contour.independent_indices(symmetric);
    let half = try_map_indexed(exec, count, |i| {
        let s = contour.frequency(i, k);
        f(i, s).map_err(|e| frequency_error(i, s, e))
    })?;
    let mut out = half;
    for i in count..l {
        let mirror = l - i;
        let v = out[mirror].iter().map(|z| z.conj()).collect();
        out.push(v);
    }
    Ok((out, count))
}

/// Convolution weights `ω_0, …, ω_N` (matrix valued; scalars are `1 × 1`).
#[derive(Clone, Debug)]
pub struct CqWeights {
    k: f64,
    weights: Vec<DMatrix<C64>>,
}

impl CqWeights {
    pub fn from_matrices(k: f64, weights: Vec<DMatrix<C64>>) -> Self {
        CqWeights { k, weights }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.weights.first().map_or((0, 0), |w| w.shape())
    }

    pub fn weight(&self, m: usize) -> &DMatrix<C64> {
        &self.weights[m]
    }

    pub fn weights(&self) -> &[DMatrix<C64>] {
        &self.weights
    }

    /// The `(0, 0)` entry of `ω_m`.
    pub fn scalar(&self, m: usize) -> C64 {
        self.weights[m][(0, 0)]
    }

    /// `max_m ‖Im ω_m‖_max / max_m ‖ω_m‖_max`.
    pub fn imaginary_residue(&self) -> f64 {
        let mut im: f64 = 0.0;
        let mut all: f64 = 0.0;
        for w in &self.weights {
            for z in w.iter() {
                im = im.max(z.im.abs());
                all = all.max(z.norm());
            }
        }
        if all == 0.0 {
            0.0
        } else {
            im / all
        }
    }

    /// Real parts of the weights, for operators with real kernels.
    pub fn real_parts(&self) -> Vec<DMatrix<f64>> {
        self.weights.iter().map(|w| w.map(|z| z.re)).collect()
    }

    /// Truncated Cauchy product: the weights of `F·G` from those of `F`, `G`.
    pub fn convolve(&self, other: &CqWeights) -> Result<CqWeights> {
        if self.dims().1 != other.dims().0 {
            return Err(Error::InvalidInput("weight shapes are incompatible".into()));
        }
        let n = self.len().min(other.len());
        let weights = (0..n)
            .map(|m| {
                let mut acc = DMatrix::from_element(self.dims().0, other.dims().1, C64::new(0.0, 0.0));
                for j in 0..=m {
                    acc += &self.weights[j] * &other.weights[m - j];
                }
                acc
            })
            .collect();
        Ok(CqWeights { k: self.k, weights })
    }
}

/// `ω_m = ρ^{−m}/L Σ_l F(s_l) ζ_l^{−m}` for `m = 0..=N`.
pub fn cq_weights(f: &dyn TransferFunction, grid: &TimeGrid, contour: &Contour, exec: Execution) -> Result<CqWeights> {
    let (r, c) = f.dims();
    let (samples, _) = map_frequencies(contour, grid.k(), f.is_real(), exec, |_, s| {
        let m = f.matrix(s)?;
        if m.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidInput("transfer function is not finite".into()));
        }
        Ok(m.as_slice().to_vec())
    })?;
    let l = contour.len();
    let fft = FftPlanner::new().plan_fft_forward(l);
    let mut weights = vec![DMatrix::from_element(r, c, C64::new(0.0, 0.0)); grid.n_samples()];
    let mut buf = vec![C64::new(0.0, 0.0); l];
    for e in 0..r * c {
        for (b, s) in buf.iter_mut().zip(&samples) {
            *b = s[e];
        }
        fft.process(&mut buf);
        let mut scale = 1.0 / l as f64;
        for (m, w) in weights.iter_mut().enumerate() {
            w.as_mut_slice()[e] = buf[m] * scale;
            scale /= contour.radius();
        }
    }
    Ok(CqWeights { k: grid.k(), weights })
}

fn check_samples(samples: &[Vec<C64>], len: usize, dim: usize) -> Result<()> {
    if samples.len() != len {
        return Err(Error::InvalidInput(format!("{} samples where {len} expected", samples.len())));
    }
    if samples.iter().any(|g| g.len() != dim) {
        return Err(Error::InvalidInput(format!("sample of wrong dimension, {dim} expected")));
    }
    Ok(())
}

/// `y_n = Σ_{m=0}^{n} ω_m g_{n−m}` for `n = 0..=N`.
pub fn forward_convolution(w: &CqWeights, g: &[Vec<C64>]) -> Result<Vec<Vec<C64>>> {
    let (r, c) = w.dims();
    check_samples(g, w.len(), c)?;
    let gv: Vec<DVector<C64>> = g.iter().map(|x| DVector::from_column_slice(x)).collect();
    Ok((0..g.len())
        .map(|n| {
            let mut acc = DVector::from_element(r, C64::new(0.0, 0.0));
            for m in 0..=n {
                acc += w.weight(m) * &gv[n - m];
            }
            acc.as_slice().to_vec()
        })
        .collect())
}

/// Solves `Σ_{m=0}^{n} ω_m y_{n−m} = g_n` step by step.
pub fn solve_convolution_equation_marching(
    f: &dyn TransferFunction,
    grid: &TimeGrid,
    contour: &Contour,
    g: &[Vec<C64>],
) -> Result<Vec<Vec<C64>>> {
    let (r, c) = f.dims();
    if r != c {
        return Err(Error::InvalidInput("convolution equation needs a square operator".into()));
    }
    check_samples(g, grid.n_samples(), r)?;
    let w = cq_weights(f, grid, contour, Execution::default())?;
    let w0 = DenseLu::new(w.weight(0).clone())
        .map_err(|e| Error::Singular(format!("first convolution weight: {e}")))?;
    let mut y: Vec<DVector<C64>> = Vec::with_capacity(g.len());
    for n in 0..g.len() {
        let mut rhs = DVector::from_column_slice(&g[n]);
        for m in 1..=n {
            rhs -= w.weight(m) * &y[n - m];
        }
        y.push(DVector::from_vec(w0.solve(rhs.as_slice())));
    }
    Ok(y.into_iter().map(|v| v.as_slice().to_vec()).collect())
}

/// Result of [`all_steps_at_once`].
#[derive(Clone, Debug)]
pub struct AllSteps {
    pub samples: Vec<Vec<C64>>,
    /// Number of `F(s)` solves performed.
    pub solves: usize,
}

/// Solves the discrete convolution equation by diagonalization: scaled
/// transform of `g`, one independent solve per contour frequency, inverse
/// transform. Conjugate symmetry halves the solves when both `F` and `g`
/// are real.
pub fn all_steps_at_once(
    f: &dyn TransferFunction,
    grid: &TimeGrid,
    contour: &Contour,
    g: &[Vec<C64>],
    exec: Execution,
) -> Result<AllSteps> {
    let (r, c) = f.dims();
    if r != c {
        return Err(Error::InvalidInput("convolution equation needs a square operator".into()));
    }
    check_samples(g, grid.n_samples(), r)?;
    let ghat = scaled_transform(contour, g)?;
    let symmetric = f.is_real() && g.iter().flatten().all(|z| z.im == 0.0);
    let (yhat, solves) = map_frequencies(contour, grid.k(), symmetric, exec, |l, s| f.solve(s, &ghat[l]))?;
    let samples = inverse_scaled_transform(contour, &yhat, grid.n_samples())?;
    Ok(AllSteps { samples, solves })
}

/// Wraps real scalar samples as `1`-vectors.
pub fn scalar_samples(g: &[f64]) -> Vec<Vec<C64>> {
    g.iter().map(|&x| vec![C64::new(x, 0.0)]).collect()
}
