//! Quadrature rules: Gauss-Legendre on intervals, geometrically graded rules
//! for endpoint singularities, and collapsed-Gauss rules on triangles.

use std::f64::consts::PI;

/// A one-dimensional rule on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct Rule1d {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1d {
    /// `n`-point Gauss-Legendre rule on `[0, 1]`, exact for degree `2n - 1`.
    pub fn gauss(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        Rule1d {
            points: x.iter().map(|&t| 0.5 * (t + 1.0)).collect(),
            weights: w.iter().map(|&w| 0.5 * w).collect(),
        }
    }

    /// Composite rule with breakpoints `1, σ, σ², …, σ^levels, 0`. The piece
    /// touching 1 gets `n_far` Gauss points and the count drops linearly to
    /// `n_near` at the piece touching 0 (hp-grading). Integrates `log(t)` and
    /// similar endpoint behaviour at `t = 0` to near machine precision.
    pub fn graded(n_far: usize, n_near: usize, sigma: f64, levels: usize) -> Self {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut hi = 1.0;
        for level in 0..=levels {
            let lo = if level == levels { 0.0 } else { hi * sigma };
            let frac = level as f64 / levels.max(1) as f64;
            let n = (n_far as f64 + (n_near as f64 - n_far as f64) * frac).round() as usize;
            let base = Rule1d::gauss(n.max(1));
            for (&t, &w) in base.points.iter().zip(&base.weights) {
                points.push(lo + (hi - lo) * t);
                weights.push((hi - lo) * w);
            }
            hi = lo;
        }
        Rule1d { points, weights }
    }

    /// Splits `[0, 1]` into `pieces` equal parts with an `n`-point rule on each.
    pub fn composite(n: usize, pieces: usize) -> Self {
        let base = Rule1d::gauss(n);
        let h = 1.0 / pieces as f64;
        let mut points = Vec::with_capacity(n * pieces);
        let mut weights = Vec::with_capacity(n * pieces);
        for p in 0..pieces {
            for (&t, &w) in base.points.iter().zip(&base.weights) {
                points.push((p as f64 + t) * h);
                weights.push(w * h);
            }
        }
        Rule1d { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let h = b - a;
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(a + h * t))
            .sum::<f64>()
            * h
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss rule needs at least one point");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// A rule on the reference triangle `(0,0), (1,0), (0,1)` (area ½).
#[derive(Clone, Debug)]
pub struct TriangleRule {
    /// Reference coordinates `(ξ, η)`.
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// Collapsed (Duffy) tensor Gauss rule exact for polynomials of total
    /// degree `degree`.
    pub fn with_degree(degree: usize) -> Self {
        // The collapse adds one degree in the radial direction.
        let n = (degree + 2).div_ceil(2).max(1);
        let g = Rule1d::gauss(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (&u, &wu) in g.points.iter().zip(&g.weights) {
            for (&v, &wv) in g.points.iter().zip(&g.weights) {
                points.push([u, v * (1.0 - u)]);
                weights.push(wu * wv * (1.0 - u));
            }
        }
        TriangleRule { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
