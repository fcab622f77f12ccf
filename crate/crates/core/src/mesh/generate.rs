use super::{Mesh, sorted_edge};
use crate::{Error, Point, Result};
use std::collections::HashMap;

/// Uniform triangulation of `[-0.5, 0.5]²`: a `4·2^levels` square grid with
/// every cell cut along its `/` diagonal, so level 0 has 32 triangles.
pub fn generate_square_mesh(levels: u32) -> Mesh {
    let n = 4usize << levels;
    let h = 1.0 / n as f64;
    let mesh = grid_cells(
        [-0.5, -0.5],
        h,
        h,
        n,
        n,
        |_, _| true,
    );
    Mesh::with_computed_components(mesh.0, mesh.1).expect("square grid is valid")
}

/// Red refinement: every triangle is split into four congruent children
/// through its edge midpoints. Parent vertices keep their indices; midpoint
/// vertices follow in [`Mesh::edges`] order.
pub fn refine_uniform(mesh: &Mesh) -> Mesh {
    let edges = mesh.edges();
    let nv = mesh.n_vertices();
    let mut vertices = mesh.vertices().to_vec();
    let mut mid = HashMap::with_capacity(edges.len());
    for (i, &[a, b]) in edges.iter().enumerate() {
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
        mid.insert([a, b], nv + i);
    }
    let mut triangles = Vec::with_capacity(4 * mesh.n_triangles());
    let mut components = Vec::with_capacity(4 * mesh.n_triangles());
    for (t, &[a, b, c]) in mesh.triangles().iter().enumerate() {
        let ab = mid[&sorted_edge(a, b)];
        let bc = mid[&sorted_edge(b, c)];
        let ca = mid[&sorted_edge(c, a)];
        triangles.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        components.extend([mesh.components()[t]; 4]);
    }
    Mesh::new(vertices, triangles, components).expect("refinement preserves validity")
}

/// An axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisBox {
    pub min: Point,
    pub max: Point,
}

impl AxisBox {
    pub fn new(min: Point, max: Point) -> Result<Self> {
        if !(max[0] > min[0] && max[1] > min[1]) {
            return Err(Error::InvalidInput(format!(
                "box corners {min:?}, {max:?} do not span a positive area"
            )));
        }
        Ok(AxisBox { min, max })
    }

    fn separated_from(&self, other: &AxisBox) -> bool {
        self.max[0] < other.min[0]
            || other.max[0] < self.min[0]
            || self.max[1] < other.min[1]
            || other.max[1] < self.min[1]
    }
}

/// Meshes a union of disjoint boxes, each a separate component numbered in
/// list order. Each box gets a structured grid with cell sizes at most `h`.
pub fn generate_boxes_mesh(boxes: &[AxisBox], h: f64) -> Result<Mesh> {
    if boxes.is_empty() {
        return Err(Error::InvalidInput("no boxes given".into()));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!("mesh size must be positive, got {h}")));
    }
    for i in 0..boxes.len() {
        for j in 0..i {
            if !boxes[i].separated_from(&boxes[j]) {
                return Err(Error::InvalidInput(format!(
                    "boxes {j} and {i} touch or overlap; obstacles must be disjoint"
                )));
            }
        }
    }
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut components = Vec::new();
    for (c, b) in boxes.iter().enumerate() {
        let w = b.max[0] - b.min[0];
        let ht = b.max[1] - b.min[1];
        let nx = ((w / h).ceil() as usize).max(1);
        let ny = ((ht / h).ceil() as usize).max(1);
        let (v, t) = grid_cells(b.min, w / nx as f64, ht / ny as f64, nx, ny, |_, _| true);
        let base = vertices.len();
        vertices.extend(v);
        components.extend(std::iter::repeat(c).take(t.len()));
        triangles.extend(t.into_iter().map(|[p, q, r]| [p + base, q + base, r + base]));
    }
    Mesh::new(vertices, triangles, components)
}

/// Triangulates the union of the cells `(i, j)` of an `nx × ny` grid with
/// lower-left corner `origin` and spacing `h` for which `mask(i, j)` holds.
/// Components are the edge-connected pieces.
pub fn generate_masked_grid(
    origin: Point,
    h: f64,
    nx: usize,
    ny: usize,
    mask: impl Fn(usize, usize) -> bool,
) -> Result<Mesh> {
    if !(h > 0.0) || nx == 0 || ny == 0 {
        return Err(Error::InvalidInput("grid must have positive size".into()));
    }
    let (v, t) = grid_cells(origin, h, h, nx, ny, mask);
    if t.is_empty() {
        return Err(Error::InvalidInput("mask selects no cells".into()));
    }
    Mesh::with_computed_components(v, t)
}

/// Cells cut along the `/` diagonal; only vertices of selected cells are kept.
fn grid_cells(
    origin: Point,
    hx: f64,
    hy: f64,
    nx: usize,
    ny: usize,
    mask: impl Fn(usize, usize) -> bool,
) -> (Vec<Point>, Vec<[usize; 3]>) {
    let mut index = vec![usize::MAX; (nx + 1) * (ny + 1)];
    let mut vertices = Vec::new();
    let mut vid = |i: usize, j: usize, vertices: &mut Vec<Point>| {
        let k = j * (nx + 1) + i;
        if index[k] == usize::MAX {
            index[k] = vertices.len();
            vertices.push([origin[0] + i as f64 * hx, origin[1] + j as f64 * hy]);
        }
        index[k]
    };
    // Vertices are numbered row by row, so create them in that order first.
    let mut used = vec![false; (nx + 1) * (ny + 1)];
    for j in 0..ny {
        for i in 0..nx {
            if mask(i, j) {
                for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                    used[(j + dj) * (nx + 1) + i + di] = true;
                }
            }
        }
    }
    for j in 0..=ny {
        for i in 0..=nx {
            if used[j * (nx + 1) + i] {
                vid(i, j, &mut vertices);
            }
        }
    }
    let mut triangles = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if !mask(i, j) {
                continue;
            }
            let a = vid(i, j, &mut vertices);
            let b = vid(i + 1, j, &mut vertices);
            let c = vid(i + 1, j + 1, &mut vertices);
            let d = vid(i, j + 1, &mut vertices);
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    (vertices, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::extract_boundary;

    #[test]
    fn square_counts() {
        let m0 = generate_square_mesh(0);
        assert_eq!(m0.n_triangles(), 32);
        assert_eq!(m0.n_vertices(), 25);
        // Euler characteristic of a disk: V − E + F = 1.
        let e = m0.edges().len() as i64;
        assert_eq!(25 - e + 32, 1);
        assert_eq!(generate_square_mesh(1).n_triangles(), 128);
        assert_eq!(generate_square_mesh(3).n_triangles(), 2048);
        assert!((generate_square_mesh(2).total_area() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn refinement_matches_finer_grid_geometry() {
        let r = refine_uniform(&generate_square_mesh(0));
        assert_eq!(r.n_triangles(), 128);
        assert!((r.total_area() - 1.0).abs() < 1e-14);
        assert_eq!(&r.vertices()[..25], generate_square_mesh(0).vertices());
        let (lo, hi) = r.edge_length_range();
        assert!((lo - 0.125).abs() < 1e-15 && (hi - 0.125 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn boxes_are_separate_components() {
        let boxes = [
            AxisBox::new([-1.0, 0.2], [-0.2, 1.0]).unwrap(),
            AxisBox::new([0.2, 0.2], [1.0, 1.0]).unwrap(),
            AxisBox::new([-1.0, -1.0], [-0.2, -0.2]).unwrap(),
            AxisBox::new([0.2, -1.0], [1.0, -0.2]).unwrap(),
        ];
        let m = generate_boxes_mesh(&boxes, 0.2).unwrap();
        assert_eq!(m.n_components(), 4);
        assert_eq!(m.components()[0], 0);
        let b = extract_boundary(&m).unwrap();
        assert_eq!(b.n_loops(), 4);
        assert!((m.total_area() - 4.0 * 0.64).abs() < 1e-13);
    }

    #[test]
    fn touching_boxes_rejected() {
        let boxes = [
            AxisBox::new([0.0, 0.0], [1.0, 1.0]).unwrap(),
            AxisBox::new([1.0, 0.0], [2.0, 1.0]).unwrap(),
        ];
        assert!(generate_boxes_mesh(&boxes, 0.5).is_err());
    }

    #[test]
    fn masked_grid_builds_nonconvex_shape() {
        // A "C" shape: 4×4 cells with the middle of the right column removed.
        let m = generate_masked_grid([0.0, 0.0], 0.25, 4, 4, |i, j| !(i >= 1 && (j == 1 || j == 2))).unwrap();
        assert_eq!(m.n_components(), 1);
        assert!((m.total_area() - 10.0 * 0.0625).abs() < 1e-14);
        let b = extract_boundary(&m).unwrap();
        assert_eq!(b.n_loops(), 1);
    }
}
