use super::pairs::{pair_nodes, PairNodes, PairRules};
use super::{BoundarySpaces, SpaceKind};
use crate::mesh::BoundaryMesh;
use crate::parallel::{try_map_indexed, Execution};
use crate::{Error, Result, C64};
use nalgebra::DMatrix;

/// Galerkin matrices of the four boundary integral operators at one
/// frequency. `Kᵗ` is `K` transposed and is not stored.
#[derive(Clone, Debug)]
pub struct LaplaceBlock {
    pub s: C64,
    /// `⟨μ_i, V μ_j⟩`, `X_h × X_h`.
    pub v: DMatrix<C64>,
    /// `⟨μ_i, K ψ_j⟩`, `X_h × Y_h`.
    pub k: DMatrix<C64>,
    /// `⟨W ψ_j, ψ_i⟩`, `Y_h × Y_h`.
    pub w: DMatrix<C64>,
}

impl LaplaceBlock {
    /// `⟨Kᵗ μ_j, ψ_i⟩ = K_ji`.
    pub fn kt(&self) -> DMatrix<C64> {
        self.k.transpose()
    }
}

#[inline]
fn basis(degree: usize, kind: SpaceKind, t: f64, out: &mut [f64; 3]) -> usize {
    match (kind, degree) {
        (SpaceKind::X, 1) => {
            out[0] = 1.0;
            1
        }
        (SpaceKind::X, _) => {
            out[0] = 1.0 - t;
            out[1] = t;
            2
        }
        (SpaceKind::Y, 1) => {
            out[0] = 1.0 - t;
            out[1] = t;
            2
        }
        (SpaceKind::Y, _) => {
            out[0] = (1.0 - t) * (1.0 - 2.0 * t);
            out[1] = t * (2.0 * t - 1.0);
            out[2] = 4.0 * t * (1.0 - t);
            3
        }
    }
}

#[inline]
fn basis_dt(degree: usize, t: f64, out: &mut [f64; 3]) {
    if degree == 1 {
        out[0] = -1.0;
        out[1] = 1.0;
    } else {
        out[0] = 4.0 * t - 3.0;
        out[1] = 4.0 * t - 1.0;
        out[2] = 4.0 - 8.0 * t;
    }
}

/// `Σ_n w_n k_n A_a(t¹_n) B_b(t²_n)` as a row-major `na × nb` array.
fn contract(
    nodes: &PairNodes,
    kernel: &[C64],
    degree: usize,
    a: SpaceKind,
    b: SpaceKind,
    swap: bool,
) -> (usize, usize, Vec<C64>) {
    let mut ba = [0.0; 3];
    let mut bb = [0.0; 3];
    let na = basis(degree, a, 0.0, &mut ba);
    let nb = basis(degree, b, 0.0, &mut bb);
    let mut out = vec![C64::new(0.0, 0.0); na * nb];
    for n in 0..nodes.len() {
        let (t1, t2) = if swap { (nodes.tq[n], nodes.tp[n]) } else { (nodes.tp[n], nodes.tq[n]) };
        basis(degree, a, t1, &mut ba);
        basis(degree, b, t2, &mut bb);
        let f = kernel[n] * nodes.w[n];
        for i in 0..na {
            let fi = f * ba[i];
            for j in 0..nb {
                out[i * nb + j] += fi * bb[j];
            }
        }
    }
    (na, nb, out)
}

/// Local Maue form `Σ w Φ (∂_τψ_a ∂_τψ_b + s² ν_P·ν_Q ψ_a ψ_b)` with test on `P`.
fn contract_w(nodes: &PairNodes, degree: usize, s: C64, hp: f64, hq: f64, nn: f64) -> Vec<C64> {
    let n = degree + 1;
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    let (mut pa, mut pb, mut da, mut db) = ([0.0; 3], [0.0; 3], [0.0; 3], [0.0; 3]);
    let s2 = s * s * nn;
    let inv = 1.0 / (hp * hq);
    for k in 0..nodes.len() {
        basis(degree, SpaceKind::Y, nodes.tp[k], &mut pa);
        basis(degree, SpaceKind::Y, nodes.tq[k], &mut pb);
        basis_dt(degree, nodes.tp[k], &mut da);
        basis_dt(degree, nodes.tq[k], &mut db);
        let g = nodes.g[k] * nodes.w[k];
        let gs = g * s2;
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] += g * (da[i] * db[j] * inv) + gs * (pa[i] * pb[j]);
            }
        }
    }
    out
}

/// What to assemble: `V` and `K` with given test/trial spaces, and `W`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Request {
    pub v: Option<(SpaceKind, SpaceKind)>,
    pub k: Option<(SpaceKind, SpaceKind)>,
    pub w: bool,
}

struct Local {
    p: usize,
    q: usize,
    v: Option<[(usize, usize, Vec<C64>); 2]>,
    k: Option<[(usize, usize, Vec<C64>); 2]>,
    w: Option<Vec<C64>>,
}

fn check_finite(p: usize, q: usize, s: C64, vals: &[C64]) -> Result<()> {
    if vals.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Quadrature {
            p,
            q,
            message: format!("non-finite entry at s = {s}"),
        })
    }
}

pub(crate) fn assemble_request(
    bmesh: &BoundaryMesh,
    spaces: &BoundarySpaces,
    s: C64,
    req: Request,
    exec: Execution,
) -> Result<(Option<DMatrix<C64>>, Option<DMatrix<C64>>, Option<DMatrix<C64>>)> {
    if !(s.re > 0.0) {
        return Err(Error::InvalidInput(format!("boundary operators need Re s > 0, got {s}")));
    }
    let degree = spaces.degree();
    let np = bmesh.n_panels();
    let pairs: Vec<(usize, usize)> = (0..np).flat_map(|p| (p..np).map(move |q| (p, q))).collect();
    let rules = PairRules::new(degree);
    let locals = try_map_indexed(exec, pairs.len(), |i| -> Result<Local> {
        let (p, q) = pairs[i];
        let nodes = pair_nodes(bmesh, p, q, s, &rules);
        let v = req.v.map(|(a, b)| {
            [
                contract(&nodes, &nodes.g, degree, a, b, false),
                contract(&nodes, &nodes.g, degree, a, b, true),
            ]
        });
        let k = req.k.map(|(a, b)| {
            [
                contract(&nodes, &nodes.kq, degree, a, b, false),
                contract(&nodes, &nodes.kp, degree, a, b, true),
            ]
        });
        let w = req.w.then(|| {
            let (np_, nq_) = (bmesh.normal(p), bmesh.normal(q));
            let nn = np_[0] * nq_[0] + np_[1] * nq_[1];
            contract_w(&nodes, degree, s, bmesh.length(p), bmesh.length(q), nn)
        });
        for m in v.iter().chain(k.iter()).flatten() {
            check_finite(p, q, s, &m.2)?;
        }
        if let Some(w) = &w {
            check_finite(p, q, s, w)?;
        }
        Ok(Local { p, q, v, k, w })
    })?;

    let zeros = |a: SpaceKind, b: SpaceKind| DMatrix::from_element(spaces.dim(a), spaces.dim(b), C64::new(0.0, 0.0));
    let mut vm = req.v.map(|(a, b)| zeros(a, b));
    let mut km = req.k.map(|(a, b)| zeros(a, b));
    let mut wm = req.w.then(|| zeros(SpaceKind::Y, SpaceKind::Y));
    let scatter = |m: &mut DMatrix<C64>, rows: &[usize], cols: &[usize], local: &[C64]| {
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                m[(r, c)] += local[i * cols.len() + j];
            }
        }
    };
    for l in &locals {
        let (p, q) = (l.p, l.q);
        if let (Some(m), Some(parts), Some((a, b))) = (vm.as_mut(), l.v.as_ref(), req.v) {
            scatter(m, &spaces.dofs(a, p), &spaces.dofs(b, q), &parts[0].2);
            if p != q {
                scatter(m, &spaces.dofs(a, q), &spaces.dofs(b, p), &parts[1].2);
            }
        }
        if let (Some(m), Some(parts), Some((a, b))) = (km.as_mut(), l.k.as_ref(), req.k) {
            scatter(m, &spaces.dofs(a, p), &spaces.dofs(b, q), &parts[0].2);
            if p != q {
                scatter(m, &spaces.dofs(a, q), &spaces.dofs(b, p), &parts[1].2);
            }
        }
        if let (Some(m), Some(local)) = (wm.as_mut(), l.w.as_ref()) {
            let (dp, dq) = (spaces.y_dofs(p), spaces.y_dofs(q));
            scatter(m, &dp, &dq, local);
            if p != q {
                let n = dp.len();
                let tr: Vec<C64> = (0..n * n).map(|k| local[(k % n) * n + k / n]).collect();
                scatter(m, &dq, &dp, &tr);
            }
        }
    }
    Ok((vm, km, wm))
}

/// Assembles `V(s)`, `K(s)` and `W(s)` (Maue form) in one sweep over panel
/// pairs, sharing kernel evaluations.
pub fn assemble_block(bmesh: &BoundaryMesh, spaces: &BoundarySpaces, s: C64, exec: Execution) -> Result<LaplaceBlock> {
    let req = Request {
        v: Some((SpaceKind::X, SpaceKind::X)),
        k: Some((SpaceKind::X, SpaceKind::Y)),
        w: true,
    };
    let (v, k, w) = assemble_request(bmesh, spaces, s, req, exec)?;
    Ok(LaplaceBlock {
        s,
        v: v.unwrap(),
        k: k.unwrap(),
        w: w.unwrap(),
    })
}

/// `⟨μ_i, V(s) μ_j⟩` on `X_h × X_h`.
pub fn assemble_v(bmesh: &BoundaryMesh, spaces: &BoundarySpaces, s: C64) -> Result<DMatrix<C64>> {
    let req = Request {
        v: Some((SpaceKind::X, SpaceKind::X)),
        k: None,
        w: false,
    };
    Ok(assemble_request(bmesh, spaces, s, req, Execution::default())?.0.unwrap())
}

/// `⟨μ_i, K(s) ψ_j⟩` on `X_h × Y_h`.
pub fn assemble_k(bmesh: &BoundaryMesh, spaces: &BoundarySpaces, s: C64) -> Result<DMatrix<C64>> {
    let req = Request {
        v: None,
        k: Some((SpaceKind::X, SpaceKind::Y)),
        w: false,
    };
    Ok(assemble_request(bmesh, spaces, s, req, Execution::default())?.1.unwrap())
}

/// `⟨W(s) ψ_j, ψ_i⟩` on `Y_h × Y_h` via the Maue identity.
pub fn assemble_w(bmesh: &BoundaryMesh, spaces: &BoundarySpaces, s: C64) -> Result<DMatrix<C64>> {
    let req = Request {
        v: None,
        k: None,
        w: true,
    };
    Ok(assemble_request(bmesh, spaces, s, req, Execution::default())?.2.unwrap())
}

/// `V` and `K` with arbitrary test and trial spaces (e.g. `Y_h × Y_h`, as
/// needed for discrete Calderón identities).
pub fn assemble_vk_between(
    bmesh: &BoundaryMesh,
    spaces: &BoundarySpaces,
    s: C64,
    test: SpaceKind,
    trial: SpaceKind,
) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let req = Request {
        v: Some((test, trial)),
        k: Some((test, trial)),
        w: false,
    };
    let (v, k, _) = assemble_request(bmesh, spaces, s, req, Execution::default())?;
    Ok((v.unwrap(), k.unwrap()))
}
