//! Laplace-domain transfer functions and a small algebra on them.

use crate::linalg::DenseLu;
use crate::{Error, Result, C64};
use nalgebra::DMatrix;

/// A linear map `F(s)` defined for `Re s > 0`.
///
/// `apply` evaluates `F(s) x`; `solve` evaluates `F(s)⁻¹ b` where it makes
/// sense. `matrix` has a default implementation through `apply`.
pub trait TransferFunction: Sync {
    /// `(rows, cols)`.
    fn dims(&self) -> (usize, usize);

    fn apply(&self, s: C64, x: &[C64]) -> Result<Vec<C64>>;

    fn solve(&self, s: C64, _b: &[C64]) -> Result<Vec<C64>> {
        Err(Error::InvalidInput(format!("transfer function has no solve at s = {s}")))
    }

    /// `F(s)` as a dense matrix.
    fn matrix(&self, s: C64) -> Result<DMatrix<C64>> {
        let (r, c) = self.dims();
        let mut m = DMatrix::from_element(r, c, C64::new(0.0, 0.0));
        let mut e = vec![C64::new(0.0, 0.0); c];
        for j in 0..c {
            e[j] = C64::new(1.0, 0.0);
            let col = self.apply(s, &e)?;
            e[j] = C64::new(0.0, 0.0);
            for i in 0..r {
                m[(i, j)] = col[i];
            }
        }
        Ok(m)
    }

    /// True if `F(s̄) = conj F(s)`, i.e. the time-domain kernel is real.
    fn is_real(&self) -> bool {
        false
    }
}

fn check_len(x: &[C64], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::InvalidInput(format!("vector of length {} where {n} expected", x.len())));
    }
    Ok(())
}

/// Scalar transfer function from a closure.
pub struct Scalar<F> {
    f: F,
    real: bool,
}

impl<F: Fn(C64) -> C64 + Sync> Scalar<F> {
    /// A scalar function with real time-domain kernel.
    pub fn real(f: F) -> Self {
        Scalar { f, real: true }
    }

    pub fn complex(f: F) -> Self {
        Scalar { f, real: false }
    }

    pub fn eval(&self, s: C64) -> C64 {
        (self.f)(s)
    }
}

impl<F: Fn(C64) -> C64 + Sync> TransferFunction for Scalar<F> {
    fn dims(&self) -> (usize, usize) {
        (1, 1)
    }

    fn apply(&self, s: C64, x: &[C64]) -> Result<Vec<C64>> {
        check_len(x, 1)?;
        Ok(vec![(self.f)(s) * x[0]])
    }

    fn solve(&self, s: C64, b: &[C64]) -> Result<Vec<C64>> {
        check_len(b, 1)?;
        let v = (self.f)(s);
        if v.norm() == 0.0 || !v.is_finite() {
            return Err(Error::Singular(format!("scalar transfer value {v} at s = {s}")));
        }
        Ok(vec![b[0] / v])
    }

    fn is_real(&self) -> bool {
        self.real
    }
}

/// Dense matrix-valued transfer function from a closure; `solve` factorizes.
pub struct Dense<F> {
    dims: (usize, usize),
    f: F,
    real: bool,
}

impl<F: Fn(C64) -> Result<DMatrix<C64>> + Sync> Dense<F> {
    pub fn new(dims: (usize, usize), real: bool, f: F) -> Self {
        Dense { dims, f, real }
    }
}

impl<F: Fn(C64) -> Result<DMatrix<C64>> + Sync> TransferFunction for Dense<F> {
    fn dims(&self) -> (usize, usize) {
        self.dims
    }

    fn apply(&self, s: C64, x: &[C64]) -> Result<Vec<C64>> {
        check_len(x, self.dims.1)?;
        let m = self.matrix(s)?;
        Ok((m * nalgebra::DVector::from_column_slice(x)).as_slice().to_vec())
    }

    fn solve(&self, s: C64, b: &[C64]) -> Result<Vec<C64>> {
        check_len(b, self.dims.0)?;
        Ok(DenseLu::new(self.matrix(s)?)?.solve(b))
    }

    fn matrix(&self, s: C64) -> Result<DMatrix<C64>> {
        let m = (self.f)(s)?;
        if m.shape() != self.dims {
            return Err(Error::InvalidInput(format!("matrix of shape {:?} where {:?} declared", m.shape(), self.dims)));
        }
        Ok(m)
    }

    fn is_real(&self) -> bool {
        self.real
    }
}

/// `A(s) + B(s)`.
pub struct Sum<A, B>(pub A, pub B);

impl<A: TransferFunction, B: TransferFunction> TransferFunction for Sum<A, B> {
    fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    fn apply(&self, s: C64, x: &[C64]) -> Result<Vec<C64>> {
        if self.0.dims() != self.1.dims() {
            return Err(Error::InvalidInput("sum of transfer functions with different shapes".into()));
        }
        let a = self.0.apply(s, x)?;
        let b = self.1.apply(s, x)?;
        Ok(a.iter().zip(&b).map(|(u, v)| u + v).collect())
    }

    fn solve(&self, s: C64, b: &[C64]) -> Result<Vec<C64>> {
        Ok(DenseLu::new(self.matrix(s)?)?.solve(b))
    }

    fn is_real(&self) -> bool {
        self.0.is_real() && self.1.is_real()
    }
}

/// `A(s) B(s)`.
pub struct Product<A, B>(pub A, pub B);

impl<A: TransferFunction, B: TransferFunction> TransferFunction for Product<A, B> {
    fn dims(&self) -> (usize, usize) {
        (self.0.dims().0, self.1.dims().1)
    }

    fn apply(&self, s: C64, x: &[C64]) -> Result<Vec<C64>> {
        if self.0.dims().1 != self.1.dims().0 {
            return Err(Error::InvalidInput("product of transfer functions with incompatible shapes".into()));
        }
        self.0.apply(s, &self.1.apply(s, x)?)
    }

    fn solve(&self, s: C64, b: &[C64]) -> Result<Vec<C64>> {
        self.1.solve(s, &self.0.solve(s, b)?)
    }

    fn is_real(&self) -> bool {
        self.0.is_real() && self.1.is_real()
    }
}

/// `A(s)⁻¹`; swaps the roles of apply and solve.
pub struct Inverse<A>(pub A);

impl<A: TransferFunction> TransferFunction for Inverse<A> {
    fn dims(&self) -> (usize, usize) {
        let (r, c) = self.0.dims();
        (c, r)
    }

    fn apply(&self, s: C64, x: &[C64]) -> Result<Vec<C64>> {
        self.0.solve(s, x)
    }

    fn solve(&self, s: C64, b: &[C64]) -> Result<Vec<C64>> {
        self.0.apply(s, b)
    }

    fn is_real(&self) -> bool {
        self.0.is_real()
    }
}

/// The 2 × 2 block operator `[[A, B], [C, D]]`.
pub struct Block<A, B, C, D> {
    pub a: A,
    pub b: B,
    pub c: C,
    pub d: D,
}

impl<A, B, Cc, D> TransferFunction for Block<A, B, Cc, D>
where
    A: TransferFunction,
    B: TransferFunction,
    Cc: TransferFunction,
    D: TransferFunction,
{
    fn dims(&self) -> (usize, usize) {
        (self.a.dims().0 + self.c.dims().0, self.a.dims().1 + self.b.dims().1)
    }

    fn apply(&self, s: C64, x: &[C64]) -> Result<Vec<C64>> {
        let (ra, ca) = self.a.dims();
        let (rc, cb) = (self.c.dims().0, self.b.dims().1);
        if self.b.dims().0 != ra || self.c.dims().1 != ca || self.d.dims() != (rc, cb) {
            return Err(Error::InvalidInput("inconsistent block shapes".into()));
        }
        check_len(x, ca + cb)?;
        let (x1, x2) = x.split_at(ca);
        let top: Vec<C64> = self.a.apply(s, x1)?.iter().zip(self.b.apply(s, x2)?).map(|(u, v)| u + v).collect();
        let bot: Vec<C64> = self.c.apply(s, x1)?.iter().zip(self.d.apply(s, x2)?).map(|(u, v)| u + v).collect();
        Ok(top.into_iter().chain(bot).collect())
    }

    fn solve(&self, s: C64, b: &[C64]) -> Result<Vec<C64>> {
        Ok(DenseLu::new(self.matrix(s)?)?.solve(b))
    }

    fn is_real(&self) -> bool {
        self.a.is_real() && self.b.is_real() && self.c.is_real() && self.d.is_real()
    }
}

impl<T: TransferFunction + ?Sized> TransferFunction for &T {
    fn dims(&self) -> (usize, usize) {
        (**self).dims()
    }
    fn apply(&self, s: C64, x: &[C64]) -> Result<Vec<C64>> {
        (**self).apply(s, x)
    }
    fn solve(&self, s: C64, b: &[C64]) -> Result<Vec<C64>> {
        (**self).solve(s, b)
    }
    fn matrix(&self, s: C64) -> Result<DMatrix<C64>> {
        (**self).matrix(s)
    }
    fn is_real(&self) -> bool {
        (**self).is_real()
    }
}
