//! Conforming triangulations of one or more disjoint polygonal obstacles.

mod boundary;
mod generate;
mod io;

pub use boundary::{extract_boundary, BoundaryMesh};
pub use generate::{generate_boxes_mesh, generate_masked_grid, generate_square_mesh, refine_uniform, AxisBox};
pub use io::{load_mesh, read_mesh, write_mesh, save_mesh};

use crate::{Error, Point, Result};
use std::collections::HashMap;

/// A conforming triangulation. Triangles are counterclockwise; each triangle
/// carries the id of the connected component (obstacle) it belongs to.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    components: Vec<usize>,
    n_components: usize,
}

impl Mesh {
    /// Validates and builds a mesh.
    ///
    /// Checks positive orientation, conformity (every edge shared by at most
    /// two triangles with opposite orientation, no vertex on the interior of a
    /// boundary edge) and that component ids `0..N` label exactly the
    /// edge-connected pieces.
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>, components: Vec<usize>) -> Result<Self> {
        if components.len() != triangles.len() {
            return Err(Error::InvalidMesh(format!(
                "{} component ids for {} triangles",
                components.len(),
                triangles.len()
            )));
        }
        if triangles.is_empty() {
            return Err(Error::InvalidMesh("no triangles".into()));
        }
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(format!("triangle {t} references a missing vertex")));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!("triangle {t} repeats a vertex")));
            }
            let a = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if !(a > 0.0) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} has non-positive signed area {a:.3e} (clockwise or degenerate)"
                )));
            }
        }
        let n_components = components.iter().max().map_or(0, |&m| m + 1);
        let mesh = Mesh {
            vertices,
            triangles,
            components,
            n_components,
        };
        mesh.check_conformity()?;
        mesh.check_components()?;
        Ok(mesh)
    }

    /// Builds a mesh and assigns component ids from edge connectivity,
    /// numbered in order of the lowest triangle index in each piece.
    pub fn with_computed_components(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let labels = connected_labels(&triangles);
        Mesh::new(vertices, triangles, labels)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Component id of each triangle.
    pub fn components(&self) -> &[usize] {
        &self.components
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        signed_area(a, b, c)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.area(t)).sum()
    }

    /// Area of each component.
    pub fn component_areas(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_components];
        for t in 0..self.n_triangles() {
            out[self.components[t]] += self.area(t);
        }
        out
    }

    /// Component of each vertex (vertices are never shared across components).
    pub fn vertex_components(&self) -> Vec<usize> {
        let mut out = vec![usize::MAX; self.n_vertices()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                out[v] = self.components[t];
            }
        }
        out
    }

    /// Unique undirected edges `(a, b)` with `a < b`, in order of first
    /// appearance over triangles (local edges `01, 12, 20`).
    pub fn edges(&self) -> Vec<[usize; 2]> {
        let mut seen = HashMap::new();
        let mut out = Vec::new();
        for tri in &self.triangles {
            for e in 0..3 {
                let key = sorted_edge(tri[e], tri[(e + 1) % 3]);
                seen.entry(key).or_insert_with(|| {
                    out.push(key);
                    out.len() - 1
                });
            }
        }
        out
    }

    /// Map from sorted edge to its index in [`Mesh::edges`].
    pub fn edge_index(&self) -> HashMap<[usize; 2], usize> {
        self.edges().into_iter().enumerate().map(|(i, e)| (e, i)).collect()
    }

    /// Shortest and longest edge lengths.
    pub fn edge_length_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for [a, b] in self.edges() {
            let l = dist(self.vertices[a], self.vertices[b]);
            lo = lo.min(l);
            hi = hi.max(l);
        }
        (lo, hi)
    }

    fn check_conformity(&self) -> Result<()> {
        // Directed edge counts: a conforming, consistently oriented mesh uses
        // each directed edge at most once.
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for e in 0..3 {
                let key = (tri[e], tri[(e + 1) % 3]);
                if let Some(prev) = directed.insert(key, t) {
                    return Err(Error::InvalidMesh(format!(
                        "edge {}-{} used twice with the same orientation (triangles {prev} and {t}); overlapping or flipped",
                        key.0, key.1
                    )));
                }
            }
        }
        // Boundary edges must not contain other vertices (hanging nodes).
        let boundary: Vec<(usize, usize)> = directed
            .keys()
            .filter(|&&(a, b)| !directed.contains_key(&(b, a)))
            .copied()
            .collect();
        let on_boundary: Vec<usize> = {
            let mut v: Vec<usize> = boundary.iter().flat_map(|&(a, b)| [a, b]).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        for &(a, b) in &boundary {
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            let len = dist(pa, pb);
            for &v in &on_boundary {
                if v == a || v == b {
                    continue;
                }
                let p = self.vertices[v];
                let cross = (pb[0] - pa[0]) * (p[1] - pa[1]) - (pb[1] - pa[1]) * (p[0] - pa[0]);
                let along = (pb[0] - pa[0]) * (p[0] - pa[0]) + (pb[1] - pa[1]) * (p[1] - pa[1]);
                if cross.abs() <= 1e-12 * len * len && along > 0.0 && along < len * len {
                    return Err(Error::InvalidMesh(format!(
                        "hanging node {v} on edge {a}-{b}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_components(&self) -> Result<()> {
        let labels = connected_labels(&self.triangles);
        let n = labels.iter().max().map_or(0, |&m| m + 1);
        // Each connected piece must carry one label, and labels must be distinct.
        let mut label_of_piece = vec![usize::MAX; n];
        for (t, &piece) in labels.iter().enumerate() {
            let c = self.components[t];
            if label_of_piece[piece] == usize::MAX {
                label_of_piece[piece] = c;
            } else if label_of_piece[piece] != c {
                return Err(Error::InvalidMesh(format!(
                    "connected piece containing triangle {t} carries several component ids"
                )));
            }
        }
        let mut sorted = label_of_piece.clone();
        sorted.sort_unstable();
        if sorted != (0..n).collect::<Vec<_>>() || self.n_components != n {
            return Err(Error::InvalidMesh(format!(
                "component ids must be 0..{n} with one id per connected piece, got {:?}",
                label_of_piece
            )));
        }
        Ok(())
    }
}

fn connected_labels(triangles: &[[usize; 3]]) -> Vec<usize> {
    // Union-find over triangles sharing an edge.
    let mut parent: Vec<usize> = (0..triangles.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut owner: HashMap<[usize; 2], usize> = HashMap::new();
    for (t, tri) in triangles.iter().enumerate() {
        for e in 0..3 {
            let key = sorted_edge(tri[e], tri[(e + 1) % 3]);
            if let Some(&o) = owner.get(&key) {
                let (ra, rb) = (find(&mut parent, o), find(&mut parent, t));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            } else {
                owner.insert(key, t);
            }
        }
    }
    let mut label_of_root = HashMap::new();
    let mut labels = Vec::with_capacity(triangles.len());
    for t in 0..triangles.len() {
        let r = find(&mut parent, t);
        let next = label_of_root.len();
        labels.push(*label_of_root.entry(r).or_insert(next));
    }
    labels
}

pub(crate) fn sorted_edge(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

pub fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

pub fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}
