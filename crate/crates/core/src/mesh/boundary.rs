use super::{dist, Mesh};
use crate::{Error, Point, Result};
use std::collections::HashMap;

/// The boundary partition inherited from a volume mesh.
///
/// Panels are stored loop by loop, each oriented so that the obstacle lies to
/// the left; the outward normal is the tangent rotated clockwise.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryMesh {
    /// Volume-mesh index of each boundary node.
    nodes: Vec<usize>,
    coords: Vec<Point>,
    /// Panel endpoints as boundary-node indices.
    panels: Vec<[usize; 2]>,
    loop_id: Vec<usize>,
    component: Vec<usize>,
    n_loops: usize,
}

impl BoundaryMesh {
    pub fn n_panels(&self) -> usize {
        self.panels.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_loops(&self) -> usize {
        self.n_loops
    }

    /// Panel endpoints as boundary-node indices (start, end).
    pub fn panels(&self) -> &[[usize; 2]] {
        &self.panels
    }

    /// Volume vertex index of each boundary node.
    pub fn panel_to_volume_vertex(&self) -> &[usize] {
        &self.nodes
    }

    /// Volume vertex indices of a panel's endpoints.
    pub fn panel_volume_vertices(&self, p: usize) -> [usize; 2] {
        let [a, b] = self.panels[p];
        [self.nodes[a], self.nodes[b]]
    }

    pub fn node_coords(&self) -> &[Point] {
        &self.coords
    }

    pub fn loop_id(&self, p: usize) -> usize {
        self.loop_id[p]
    }

    pub fn component(&self, p: usize) -> usize {
        self.component[p]
    }

    pub fn endpoints(&self, p: usize) -> (Point, Point) {
        let [a, b] = self.panels[p];
        (self.coords[a], self.coords[b])
    }

    pub fn length(&self, p: usize) -> f64 {
        let (a, b) = self.endpoints(p);
        dist(a, b)
    }

    pub fn midpoint(&self, p: usize) -> Point {
        let (a, b) = self.endpoints(p);
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }

    /// Unit tangent from start to end.
    pub fn tangent(&self, p: usize) -> Point {
        let (a, b) = self.endpoints(p);
        let l = dist(a, b);
        [(b[0] - a[0]) / l, (b[1] - a[1]) / l]
    }

    /// Outward unit normal.
    pub fn normal(&self, p: usize) -> Point {
        let t = self.tangent(p);
        [t[1], -t[0]]
    }

    /// Point at local parameter `t ∈ [0, 1]`.
    pub fn point_at(&self, p: usize, t: f64) -> Point {
        let (a, b) = self.endpoints(p);
        [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
    }

    pub fn perimeter(&self) -> f64 {
        (0..self.n_panels()).map(|p| self.length(p)).sum()
    }

    pub fn max_panel_length(&self) -> f64 {
        (0..self.n_panels()).map(|p| self.length(p)).fold(0.0, f64::max)
    }

    /// Distance from `x` to panel `p`.
    pub fn distance_to_panel(&self, p: usize, x: Point) -> f64 {
        let (a, b) = self.endpoints(p);
        let d = [b[0] - a[0], b[1] - a[1]];
        let l2 = d[0] * d[0] + d[1] * d[1];
        let t = (((x[0] - a[0]) * d[0] + (x[1] - a[1]) * d[1]) / l2).clamp(0.0, 1.0);
        dist(x, [a[0] + t * d[0], a[1] + t * d[1]])
    }

    /// Distance between two panels (segments).
    pub fn panel_distance(&self, p: usize, q: usize) -> f64 {
        let (a, b) = self.endpoints(p);
        let (c, d) = self.endpoints(q);
        if segments_intersect(a, b, c, d) {
            return 0.0;
        }
        self.distance_to_panel(q, a)
            .min(self.distance_to_panel(q, b))
            .min(self.distance_to_panel(p, c))
            .min(self.distance_to_panel(p, d))
    }

    /// Distance from `x` to the whole boundary, with the nearest panel.
    pub fn distance(&self, x: Point) -> (f64, usize) {
        (0..self.n_panels())
            .map(|p| (self.distance_to_panel(p, x), p))
            .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a })
    }
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let orient = |p: Point, q: Point, r: Point| (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    let (d1, d2) = (orient(c, d, a), orient(c, d, b));
    let (d3, d4) = (orient(a, b, c), orient(a, b, d));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Extracts the edges that belong to exactly one triangle, oriented with the
/// triangle on their left, and chains them into closed loops.
pub fn extract_boundary(mesh: &Mesh) -> Result<BoundaryMesh> {
    let mut count: HashMap<[usize; 2], usize> = HashMap::new();
    let mut directed = Vec::new();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        for e in 0..3 {
            let (a, b) = (tri[e], tri[(e + 1) % 3]);
            *count.entry(super::sorted_edge(a, b)).or_default() += 1;
            directed.push((a, b, t));
        }
    }
    if let Some((e, n)) = count.iter().find(|(_, &n)| n > 2) {
        return Err(Error::NonManifold(format!(
            "edge {}-{} is shared by {n} triangles",
            e[0], e[1]
        )));
    }
    // Boundary edges keyed by start vertex, in triangle order.
    let mut outgoing: HashMap<usize, (usize, usize)> = HashMap::new();
    let mut starts = Vec::new();
    for &(a, b, t) in &directed {
        if count[&super::sorted_edge(a, b)] == 1 {
            if outgoing.insert(a, (b, t)).is_some() {
                return Err(Error::NonManifold(format!(
                    "boundary vertex {a} starts two boundary edges (pinched boundary)"
                )));
            }
            starts.push(a);
        }
    }
    let mut node_of = HashMap::new();
    let mut nodes = Vec::new();
    let mut panels = Vec::new();
    let mut loop_id = Vec::new();
    let mut component = Vec::new();
    let mut visited = HashMap::new();
    let mut n_loops = 0;
    for &start in &starts {
        if visited.contains_key(&start) {
            continue;
        }
        let mut v = start;
        loop {
            visited.insert(v, ());
            let (w, t) = outgoing[&v];
            for x in [v, w] {
                node_of.entry(x).or_insert_with(|| {
                    nodes.push(x);
                    nodes.len() - 1
                });
            }
            panels.push([node_of[&v], node_of[&w]]);
            loop_id.push(n_loops);
            component.push(mesh.components()[t]);
            v = w;
            if v == start {
                break;
            }
            if visited.contains_key(&v) || !outgoing.contains_key(&v) {
                return Err(Error::NonManifold(format!(
                    "boundary chain through vertex {v} does not close"
                )));
            }
        }
        n_loops += 1;
    }
    let coords = nodes.iter().map(|&v| mesh.vertices()[v]).collect();
    Ok(BoundaryMesh {
        nodes,
        coords,
        panels,
        loop_id,
        component,
        n_loops,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_square_mesh, refine_uniform};

    #[test]
    fn square_boundary() {
        let m = generate_square_mesh(0);
        let b = extract_boundary(&m).unwrap();
        assert_eq!(b.n_panels(), 16);
        assert_eq!(b.n_nodes(), 16);
        assert_eq!(b.n_loops(), 1);
        assert!((b.perimeter() - 4.0).abs() < 1e-14);
        for p in 0..b.n_panels() {
            let mid = b.midpoint(p);
            let nu = b.normal(p);
            // Centroid is the origin.
            assert!(nu[0] * (0.0 - mid[0]) + nu[1] * (0.0 - mid[1]) < 0.0);
        }
    }

    #[test]
    fn panels_chain_head_to_tail() {
        let b = extract_boundary(&generate_square_mesh(1)).unwrap();
        for p in 0..b.n_panels() {
            let next = (p + 1) % b.n_panels();
            assert_eq!(b.panels()[p][1], b.panels()[next][0]);
        }
    }

    #[test]
    fn refined_panels_bisect_coarse_panels() {
        let coarse = generate_square_mesh(0);
        let cb = extract_boundary(&coarse).unwrap();
        let fb = extract_boundary(&refine_uniform(&coarse)).unwrap();
        assert_eq!(fb.n_panels(), 2 * cb.n_panels());
        for p in 0..cb.n_panels() {
            let (a, c) = cb.endpoints(p);
            let m = cb.midpoint(p);
            let halves = (0..fb.n_panels())
                .filter(|&q| {
                    let (x, y) = fb.endpoints(q);
                    (x == a && y == m) || (x == m && y == c)
                })
                .count();
            assert_eq!(halves, 2, "coarse panel {p}");
        }
    }

    #[test]
    fn panel_distances() {
        let b = extract_boundary(&generate_square_mesh(0)).unwrap();
        assert_eq!(b.panel_distance(0, 1), 0.0);
        let (d, _) = b.distance([1.5, 0.0]);
        assert!((d - 1.0).abs() < 1e-15);
    }
}
