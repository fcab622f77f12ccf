//! Sparse matrices in compressed-row form and a symmetric (non-Hermitian)
//! envelope `LDLᵀ` factorization with reverse Cuthill-McKee ordering.
//!
//! The factorization does not pivot. It is used for SPD matrices and for
//! complex-symmetric `S + s²M` with `Re s > 0`, whose rotated Hermitian part
//! `Re(s̄ (S + s²M))` is positive definite.

use crate::{Error, Result, C64};
use nalgebra::DMatrix;
use std::collections::VecDeque;
use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Field scalars used by the sparse kernels (`f64` and `C64`).
pub trait Scalar:
    Copy
    + Send
    + Sync
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + nalgebra::Scalar
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        C64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Compressed sparse row matrix. Column indices are sorted within each row
/// and unique.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates
    /// in input order (deterministic).
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, T)]) -> Self {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&t| (triplets[t].0, triplets[t].1));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for &t in &order {
            let (r, c, v) = triplets[t];
            assert!(r < nrows && c < ncols, "triplet ({r},{c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self::from_triplets(nrows, ncols, &[])
    }

    pub fn identity(n: usize) -> Self {
        let t: Vec<_> = (0..n).map(|i| (i, i, T::one())).collect();
        Self::from_triplets(n, n, &t)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates over the stored entries of row `i` as `(col, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    /// All stored entries as `(row, col, value)`.
    pub fn triplets(&self) -> Vec<(usize, usize, T)> {
        (0..self.nrows)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .collect()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => T::zero(),
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.ncols, "matrix-vector dimension mismatch");
        (0..self.nrows)
            .map(|i| {
                let mut acc = T::zero();
                for (j, v) in self.row(i) {
                    acc += v * x[j];
                }
                acc
            })
            .collect()
    }

    /// `y = Aᵀ x`.
    pub fn mul_vec_transpose(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.nrows, "matrix-vector dimension mismatch");
        let mut y = vec![T::zero(); self.ncols];
        for (i, &xi) in x.iter().enumerate() {
            for (j, v) in self.row(i) {
                y[j] += v * xi;
            }
        }
        y
    }

    pub fn transpose(&self) -> Self {
        let t: Vec<_> = self.triplets().into_iter().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, &t)
    }

    /// `x ↦ (xᵀ A x)` for symmetric use.
    pub fn quadratic_form(&self, x: &[T]) -> T {
        let ax = self.mul_vec(x);
        let mut acc = T::zero();
        for (a, b) in x.iter().zip(&ax) {
            acc += *a * *b;
        }
        acc
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> CsrMatrix<U> {
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `α A + β B` in the scalar type `U` (e.g. real `A, B` with complex
    /// coefficients).
    pub fn linear_combination<U>(alpha: U, a: &Self, beta: U, b: &Self) -> CsrMatrix<U>
    where
        U: Scalar + From<T>,
    {
        assert_eq!((a.nrows, a.ncols), (b.nrows, b.ncols), "shape mismatch");
        let mut t: Vec<(usize, usize, U)> = Vec::with_capacity(a.nnz() + b.nnz());
        t.extend(a.triplets().into_iter().map(|(i, j, v)| (i, j, alpha * U::from(v))));
        t.extend(b.triplets().into_iter().map(|(i, j, v)| (i, j, beta * U::from(v))));
        CsrMatrix::from_triplets(a.nrows, a.ncols, &t)
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let mut m = DMatrix::from_element(self.nrows, self.ncols, T::zero());
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.modulus()).fold(0.0, f64::max)
    }

    /// Largest entrywise `|A_ij − A_ji|`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).modulus());
            }
        }
        worst
    }
}

/// Reverse Cuthill-McKee ordering of the symmetric sparsity pattern of `a`.
/// Returns `perm` with `perm[new] = old`. Handles disconnected graphs.
pub fn reverse_cuthill_mckee<T: Scalar>(a: &CsrMatrix<T>) -> Vec<usize> {
    let n = a.nrows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for (j, _) in a.row(i) {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for list in adj.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(seed, &adj, &degree);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn pseudo_peripheral(seed: usize, adj: &[Vec<usize>], degree: &[usize]) -> usize {
    let mut start = seed;
    let mut ecc = 0;
    for _ in 0..8 {
        let levels = bfs_levels(start, adj);
        let depth = *levels.iter().filter_map(|l| l.as_ref()).max().unwrap_or(&0);
        if depth <= ecc && ecc > 0 {
            break;
        }
        ecc = depth;
        let far = (0..adj.len())
            .filter(|&v| levels[v] == Some(depth))
            .min_by_key(|&v| (degree[v], v))
            .unwrap_or(start);
        if far == start {
            break;
        }
        start = far;
    }
    start
}

fn bfs_levels(start: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let mut level = vec![None; adj.len()];
    level[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let l = level[v].unwrap();
        for &w in &adj[v] {
            if level[w].is_none() {
                level[w] = Some(l + 1);
                queue.push_back(w);
            }
        }
    }
    level
}

/// Symmetric envelope factorization `P A Pᵀ = L D Lᵀ` (plain transpose, no
/// conjugation). Only the lower triangle of `A` is read.
#[derive(Clone, Debug)]
pub struct EnvelopeLdlt<T> {
    n: usize,
    perm: Vec<usize>,
    inv_perm: Vec<usize>,
    /// First column in the envelope of each permuted row.
    first: Vec<usize>,
    /// Offsets of each row's strictly-lower envelope in `lower`.
    offset: Vec<usize>,
    lower: Vec<T>,
    diag: Vec<T>,
}

impl<T: Scalar> EnvelopeLdlt<T> {
    /// Factorizes with an RCM ordering computed from `a`'s pattern.
    pub fn new(a: &CsrMatrix<T>) -> Result<Self> {
        let perm = reverse_cuthill_mckee(a);
        Self::with_ordering(a, perm)
    }

    /// Factorizes with a caller-supplied ordering (`perm[new] = old`), e.g.
    /// one computed once and reused across frequencies.
    pub fn with_ordering(a: &CsrMatrix<T>, perm: Vec<usize>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Factorization(format!(
                "matrix is {}x{}, not square",
                n,
                a.ncols()
            )));
        }
        if perm.len() != n {
            return Err(Error::Factorization("ordering has wrong length".into()));
        }
        let mut inv_perm = vec![usize::MAX; n];
        for (new, &old) in perm.iter().enumerate() {
            inv_perm[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for old_i in 0..n {
            let i = inv_perm[old_i];
            for (old_j, _) in a.row(old_i) {
                let j = inv_perm[old_j];
                let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
                first[hi] = first[hi].min(lo);
            }
        }
        let mut offset = vec![0usize; n + 1];
        for i in 0..n {
            offset[i + 1] = offset[i] + (i - first[i]);
        }
        let mut lower = vec![T::zero(); offset[n]];
        let mut diag = vec![T::zero(); n];
        for old_i in 0..n {
            let i = inv_perm[old_i];
            for (old_j, v) in a.row(old_i) {
                let j = inv_perm[old_j];
                if j == i {
                    diag[i] = v;
                } else if j < i {
                    lower[offset[i] + j - first[i]] = v;
                }
            }
        }
        let scale = diag.iter().map(|d| d.modulus()).fold(0.0, f64::max).max(1e-300);
        for i in 0..n {
            let fi = first[i];
            let oi = offset[i];
            // Row i: g_j = a_ij − Σ_k g_k l_jk, then l_ij = g_j / d_j.
            for j in fi..i {
                let fj = first[j];
                let oj = offset[j];
                let k0 = fi.max(fj);
                let mut acc = lower[oi + j - fi];
                for k in k0..j {
                    acc -= lower[oi + k - fi] * lower[oj + k - fj];
                }
                lower[oi + j - fi] = acc;
            }
            let mut d = diag[i];
            for j in fi..i {
                let g = lower[oi + j - fi];
                let l = g / diag[j];
                d -= g * l;
                lower[oi + j - fi] = l;
            }
            if !(d.modulus() > 1e-14 * scale) || !d.modulus().is_finite() {
                return Err(Error::Factorization(format!(
                    "zero or non-finite pivot {:?} at row {} (original index {})",
                    d, i, perm[i]
                )));
            }
            diag[i] = d;
        }
        Ok(EnvelopeLdlt {
            n,
            perm,
            inv_perm,
            first,
            offset,
            lower,
            diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored strictly-lower entries.
    pub fn envelope_size(&self) -> usize {
        self.lower.len()
    }

    /// The ordering used, `perm[new] = old`.
    pub fn ordering(&self) -> &[usize] {
        &self.perm
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, b: &mut [T]) {
        assert_eq!(b.len(), self.n, "right-hand side has wrong length");
        let mut y: Vec<T> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..self.n {
            let fi = self.first[i];
            let oi = self.offset[i];
            let mut acc = y[i];
            for j in fi..i {
                acc -= self.lower[oi + j - fi] * y[j];
            }
            y[i] = acc;
        }
        for i in 0..self.n {
            y[i] = y[i] / self.diag[i];
        }
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let oi = self.offset[i];
            let yi = y[i];
            for j in fi..i {
                let l = self.lower[oi + j - fi];
                y[j] -= l * yi;
            }
        }
        for (old, slot) in b.iter_mut().enumerate() {
            *slot = y[self.inv_perm[old]];
        }
    }
}

/// Dense LU factorization wrapper with a singularity check.
pub struct DenseLu {
    lu: nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
    n: usize,
}

impl DenseLu {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::Singular("dense matrix is not square".into()));
        }
        let lu = m.lu();
        let u = lu.u();
        let dmax = (0..n).map(|i| u[(i, i)].norm()).fold(0.0, f64::max);
        let dmin = (0..n).map(|i| u[(i, i)].norm()).fold(f64::INFINITY, f64::min);
        if n > 0 && (!(dmin > 1e-15 * dmax) || !dmax.is_finite()) {
            return Err(Error::Singular(format!(
                "dense LU pivot ratio {:.3e}",
                dmin / dmax
            )));
        }
        Ok(DenseLu { lu, n })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let v = nalgebra::DVector::from_column_slice(b);
        self.lu
            .solve(&v)
            .expect("nonsingular by construction")
            .as_slice()
            .to_vec()
    }
}
