use crate::bem::{assemble_block, LaplaceBlock};
use crate::cq::TransferFunction;
use crate::fem::FemSystem;
use crate::linalg::{reverse_cuthill_mckee, CsrMatrix, DenseLu, EnvelopeLdlt};
use crate::parallel::Execution;
use crate::{Error, Result, C64};
use nalgebra::DMatrix;

/// Sign with which the double-layer block enters the first boundary row.
///
/// `Minus` gives `[[V + ΓF⁻¹Γᵗ, −½I − K], [½Iᵗ + Kᵗ, W]]`, which is what the
/// exterior trace `γ⁺u₊ = ½φ + Kφ − Vλ` produces. `Plus` replaces `−K` by
/// `+K`; it is kept only so that the two variants can be compared.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DoubleLayerSign {
    #[default]
    Minus,
    Plus,
}

/// `F_h(s) = S_h + s² M_h`, factorized with an ordering shared across
/// frequencies.
pub struct FemResolvent<'a> {
    fem: &'a FemSystem,
    ordering: Vec<usize>,
}

impl<'a> FemResolvent<'a> {
    pub fn new(fem: &'a FemSystem) -> Self {
        FemResolvent {
            fem,
            ordering: reverse_cuthill_mckee(&fem.stiffness),
        }
    }

    pub fn matrix_at(&self, s: C64) -> CsrMatrix<C64> {
        CsrMatrix::linear_combination(C64::new(1.0, 0.0), &self.fem.stiffness, s * s, &self.fem.mass)
    }

    pub fn factorize(&self, s: C64) -> Result<EnvelopeLdlt<C64>> {
        EnvelopeLdlt::with_ordering(&self.matrix_at(s), self.ordering.clone())
    }
}

impl TransferFunction for FemResolvent<'_> {
    fn dims(&self) -> (usize, usize) {
        (self.fem.n_dofs(), self.fem.n_dofs())
    }

    fn apply(&self, s: C64, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.fem.n_dofs() {
            return Err(Error::InvalidInput("vector length does not match the FEM space".into()));
        }
        Ok(self.matrix_at(s).mul_vec(x))
    }

    fn solve(&self, s: C64, b: &[C64]) -> Result<Vec<C64>> {
        if b.len() != self.fem.n_dofs() {
            return Err(Error::InvalidInput("vector length does not match the FEM space".into()));
        }
        Ok(self.factorize(s)?.solve(b))
    }

    fn is_real(&self) -> bool {
        true
    }
}

/// `F_h(s)` as a transfer function.
pub fn assemble_fh(fem: &FemSystem) -> FemResolvent<'_> {
    FemResolvent::new(fem)
}

/// `Γ_h F_h(s)⁻¹ Γ_hᵗ`, one `F_h` solve per column of `Γ_hᵗ`; also returns
/// the solutions `F_h⁻¹ Γ_hᵗ` column by column.
pub fn schur_term(fem: &FemSystem, f: &EnvelopeLdlt<C64>) -> (DMatrix<C64>, Vec<Vec<C64>>) {
    let nx = fem.dim_x();
    let gamma_c = fem.gamma.map(|v| C64::new(v, 0.0));
    let mut cols = Vec::with_capacity(nx);
    let mut out = DMatrix::from_element(nx, nx, C64::new(0.0, 0.0));
    let mut e = vec![C64::new(0.0, 0.0); nx];
    for j in 0..nx {
        e[j] = C64::new(1.0, 0.0);
        let col = f.solve(&gamma_c.mul_vec_transpose(&e));
        e[j] = C64::new(0.0, 0.0);
        for (i, v) in gamma_c.mul_vec(&col).into_iter().enumerate() {
            out[(i, j)] = v;
        }
        cols.push(col);
    }
    (out, cols)
}

/// The dense boundary matrix `B_h(s)` from the BEM block and `Γ F⁻¹ Γᵗ`.
pub fn boundary_matrix(fem: &FemSystem, block: &LaplaceBlock, schur: &DMatrix<C64>, sign: DoubleLayerSign) -> DMatrix<C64> {
    let (nx, ny) = (fem.dim_x(), fem.dim_y());
    let ih = fem.ih.to_dense();
    let ks = match sign {
        DoubleLayerSign::Minus => -1.0,
        DoubleLayerSign::Plus => 1.0,
    };
    let mut b = DMatrix::from_element(nx + ny, nx + ny, C64::new(0.0, 0.0));
    for i in 0..nx {
        for j in 0..nx {
            b[(i, j)] = block.v[(i, j)] + schur[(i, j)];
        }
        for j in 0..ny {
            b[(i, nx + j)] = -0.5 * ih[(i, j)] + ks * block.k[(i, j)];
            b[(nx + j, i)] = 0.5 * ih[(i, j)] + block.k[(i, j)];
        }
    }
    for i in 0..ny {
        for j in 0..ny {
            b[(nx + i, nx + j)] = block.w[(i, j)];
        }
    }
    b
}

/// `B_h(s)`, assembling the BEM block and the Schur term at `s`.
pub fn assemble_bh(fem: &FemSystem, s: C64, sign: DoubleLayerSign, exec: Execution) -> Result<DMatrix<C64>> {
    let block = assemble_block(&fem.bmesh, &fem.spaces, s, exec)?;
    let f = FemResolvent::new(fem).factorize(s)?;
    let (schur, _) = schur_term(fem, &f);
    Ok(boundary_matrix(fem, &block, &schur, sign))
}

/// The boundary operator `[[V, ∓K], [Kᵗ, W]]` (no identity or FEM parts):
/// the part of the boundary system that carries memory.
pub(crate) struct BoundaryMemory<'a> {
    pub fem: &'a FemSystem,
    pub sign: DoubleLayerSign,
}

impl TransferFunction for BoundaryMemory<'_> {
    fn dims(&self) -> (usize, usize) {
        let n = self.fem.dim_x() + self.fem.dim_y();
        (n, n)
    }

    fn apply(&self, s: C64, x: &[C64]) -> Result<Vec<C64>> {
        Ok((self.matrix(s)? * nalgebra::DVector::from_column_slice(x)).as_slice().to_vec())
    }

    fn solve(&self, s: C64, b: &[C64]) -> Result<Vec<C64>> {
        Ok(DenseLu::new(self.matrix(s)?)?.solve(b))
    }

    fn matrix(&self, s: C64) -> Result<DMatrix<C64>> {
        let block = assemble_block(&self.fem.bmesh, &self.fem.spaces, s, Execution::Sequential)?;
        let (nx, ny) = (self.fem.dim_x(), self.fem.dim_y());
        let ks = if self.sign == DoubleLayerSign::Minus { -1.0 } else { 1.0 };
        let mut m = DMatrix::from_element(nx + ny, nx + ny, C64::new(0.0, 0.0));
        m.view_mut((0, 0), (nx, nx)).copy_from(&block.v);
        m.view_mut((0, nx), (nx, ny)).copy_from(&(block.k.clone() * C64::new(ks, 0.0)));
        m.view_mut((nx, 0), (ny, nx)).copy_from(&block.k.transpose());
        m.view_mut((nx, nx), (ny, ny)).copy_from(&block.w);
        Ok(m)
    }

    fn is_real(&self) -> bool {
        true
    }
}
