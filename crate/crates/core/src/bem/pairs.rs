//! Quadrature nodes for panel-pair double integrals.
//!
//! Identical panels use the substitution `u = |t − τ|`, which leaves the
//! kernel a function of `u` alone; the logarithmic singularity at `u = 0` is
//! resolved by an hp-graded rule. Panels sharing a vertex use the Duffy
//! splitting about the shared corner with the same graded rule in the radial
//! variable. Nearby panels use subdivided tensor Gauss rules; distant panels
//! a plain tensor Gauss rule.

use super::kernel::kernel_and_derivative;
use crate::mesh::BoundaryMesh;
use crate::quadrature::Rule1d;
use crate::{Point, C64};

/// Nodes `(t_P, t_Q)` in panel parameters with weights (including both
/// panel lengths and substitution Jacobians) and kernel data.
#[derive(Default)]
pub(crate) struct PairNodes {
    pub tp: Vec<f64>,
    pub tq: Vec<f64>,
    pub w: Vec<f64>,
    /// `Φ(|x − y|)`.
    pub g: Vec<C64>,
    /// `∂Φ/∂ν_y` with `y` on `Q`: `Φ'(r) (y − x)·ν_Q / r`.
    pub kq: Vec<C64>,
    /// `∂Φ/∂ν_x` with `x` on `P`: `Φ'(r) (x − y)·ν_P / r`.
    pub kp: Vec<C64>,
}

impl PairNodes {
    fn push(&mut self, tp: f64, tq: f64, w: f64, g: C64, kq: C64, kp: C64) {
        self.tp.push(tp);
        self.tq.push(tq);
        self.w.push(w);
        self.g.push(g);
        self.kq.push(kq);
        self.kp.push(kp);
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum PairKind {
    Identical,
    /// Shared vertex; flags say whether it is the start of `P` and of `Q`.
    Adjacent { p_start: bool, q_start: bool },
    Near,
    Far,
}

/// Pairs with `Re(s)·dist > NEGLIGIBLE_DECAY` are skipped: the kernel is
/// below `e^{−50}` there.
pub(crate) const NEGLIGIBLE_DECAY: f64 = 50.0;

/// Rules shared by all pairs of one assembly.
pub(crate) struct PairRules {
    graded: Rule1d,
    self_inner: Rule1d,
    duffy_inner: Rule1d,
    near: Rule1d,
    far: Rule1d,
}

impl PairRules {
    pub fn new(degree: usize) -> Self {
        PairRules {
            graded: Rule1d::graded(16, 4, 0.15, 16),
            self_inner: Rule1d::gauss(degree + 2),
            duffy_inner: Rule1d::gauss(12),
            near: Rule1d::composite(8, 4),
            far: Rule1d::gauss(10 + 2 * (degree - 1)),
        }
    }
}

pub(crate) fn classify(bmesh: &BoundaryMesh, p: usize, q: usize) -> PairKind {
    if p == q {
        return PairKind::Identical;
    }
    let [a, b] = bmesh.panels()[p];
    let [c, d] = bmesh.panels()[q];
    if a == c || a == d || b == c || b == d {
        let shared = if a == c || a == d { a } else { b };
        return PairKind::Adjacent {
            p_start: shared == a,
            q_start: shared == c,
        };
    }
    let hmax = bmesh.length(p).max(bmesh.length(q));
    if bmesh.panel_distance(p, q) < 2.0 * hmax {
        PairKind::Near
    } else {
        PairKind::Far
    }
}

struct Panel {
    a: Point,
    d: Point,
    h: f64,
    nu: Point,
}

fn panel(bmesh: &BoundaryMesh, p: usize) -> Panel {
    let (a, b) = bmesh.endpoints(p);
    Panel {
        a,
        d: [b[0] - a[0], b[1] - a[1]],
        h: bmesh.length(p),
        nu: bmesh.normal(p),
    }
}

#[inline]
fn at(p: &Panel, t: f64) -> Point {
    [p.a[0] + t * p.d[0], p.a[1] + t * p.d[1]]
}

#[inline]
fn kernels(x: Point, y: Point, nu_p: Point, nu_q: Point, s: C64) -> (C64, C64, C64) {
    let dx = [y[0] - x[0], y[1] - x[1]];
    let r = (dx[0] * dx[0] + dx[1] * dx[1]).sqrt();
    let (g, dg) = kernel_and_derivative(r, s);
    let kq = dg * ((dx[0] * nu_q[0] + dx[1] * nu_q[1]) / r);
    let kp = dg * (-(dx[0] * nu_p[0] + dx[1] * nu_p[1]) / r);
    (g, kq, kp)
}

pub(crate) fn pair_nodes(bmesh: &BoundaryMesh, p: usize, q: usize, s: C64, rules: &PairRules) -> PairNodes {
    let pp = panel(bmesh, p);
    let pq = panel(bmesh, q);
    let mut out = PairNodes::default();
    match classify(bmesh, p, q) {
        PairKind::Identical => {
            let zero = C64::new(0.0, 0.0);
            let h2 = pp.h * pp.h;
            for (&u, &wu) in rules.graded.points.iter().zip(&rules.graded.weights) {
                // The kernel depends on u only; the double-layer kernel
                // vanishes on a straight panel.
                let (g, _) = kernel_and_derivative(u * pp.h, s);
                let span = 1.0 - u;
                for (&v0, &wv) in rules.self_inner.points.iter().zip(&rules.self_inner.weights) {
                    let v = span * v0;
                    let w = wu * wv * span * h2;
                    out.push(v + u, v, w, g, zero, zero);
                    out.push(v, v + u, w, g, zero, zero);
                }
            }
        }
        PairKind::Adjacent { p_start, q_start } => {
            let (c, ap) = if p_start {
                (pp.a, pp.d)
            } else {
                (at(&pp, 1.0), [-pp.d[0], -pp.d[1]])
            };
            let bq = if q_start { pq.d } else { [-pq.d[0], -pq.d[1]] };
            let local = |t: f64, start: bool| if start { t } else { 1.0 - t };
            let hh = pp.h * pq.h;
            for (&xi, &wx) in rules.graded.points.iter().zip(&rules.graded.weights) {
                for (&eta, &we) in rules.duffy_inner.points.iter().zip(&rules.duffy_inner.weights) {
                    let w = wx * we * xi * hh;
                    for (t, tau) in [(xi, xi * eta), (xi * eta, xi)] {
                        let x = [c[0] + t * ap[0], c[1] + t * ap[1]];
                        let y = [c[0] + tau * bq[0], c[1] + tau * bq[1]];
                        let (g, kq, kp) = kernels(x, y, pp.nu, pq.nu, s);
                        out.push(local(t, p_start), local(tau, q_start), w, g, kq, kp);
                    }
                }
            }
        }
        _ if s.re * bmesh.panel_distance(p, q) > NEGLIGIBLE_DECAY => {}
        kind => {
            let rule = if kind == PairKind::Near { &rules.near } else { &rules.far };
            let hh = pp.h * pq.h;
            for (&t, &wt) in rule.points.iter().zip(&rule.weights) {
                let x = at(&pp, t);
                for (&tau, &wtau) in rule.points.iter().zip(&rule.weights) {
                    let y = at(&pq, tau);
                    let (g, kq, kp) = kernels(x, y, pp.nu, pq.nu, s);
                    out.push(t, tau, wt * wtau * hh, g, kq, kp);
                }
            }
        }
    }
    out
}
