//! CSV traces and legacy-VTK ASCII snapshots.

use crate::config::Sampling;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use wavecouple::cq::TimeGrid;
use wavecouple::mesh::Mesh;
use wavecouple::Point;

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Boundary densities in long form: `step,t,field,dof,value` with `field`
/// one of `lambda`, `phi`.
pub fn write_boundary_traces(path: &Path, grid: &TimeGrid, lambda: &[Vec<f64>], phi: &[Vec<f64>]) -> io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "step,t,field,dof,value")?;
    for n in 0..grid.n_samples() {
        let t = grid.t(n);
        for (name, seq) in [("lambda", lambda), ("phi", phi)] {
            for (j, v) in seq[n].iter().enumerate() {
                writeln!(w, "{n},{t:.6e},{name},{j},{v:.9e}")?;
            }
        }
    }
    w.flush()
}

/// Exterior field at the observation points: `step,t,u_0,u_1,...`.
pub fn write_observations(path: &Path, grid: &TimeGrid, exterior: &[Vec<f64>]) -> io::Result<()> {
    let mut w = create(path)?;
    let m = exterior.first().map_or(0, |e| e.len());
    write!(w, "step,t")?;
    for j in 0..m {
        write!(w, ",u_{j}")?;
    }
    writeln!(w)?;
    for (n, row) in exterior.iter().enumerate() {
        write!(w, "{n},{:.6e}", grid.t(n))?;
        for v in row {
            write!(w, ",{v:.9e}")?;
        }
        writeln!(w)?;
    }
    w.flush()
}

pub fn write_points(path: &Path, points: &[Point]) -> io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "index,x,y")?;
    for (j, p) in points.iter().enumerate() {
        writeln!(w, "{j},{},{}", p[0], p[1])?;
    }
    w.flush()
}

/// Interior field on the mesh vertices as an unstructured grid.
pub fn write_vtk_interior(path: &Path, mesh: &Mesh, u: &[f64], title: &str) -> io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{title}")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", mesh.n_vertices())?;
    for p in mesh.vertices() {
        writeln!(w, "{} {} 0", p[0], p[1])?;
    }
    let nt = mesh.n_triangles();
    writeln!(w, "CELLS {nt} {}", 4 * nt)?;
    for t in mesh.triangles() {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(w, "CELL_TYPES {nt}")?;
    for _ in 0..nt {
        writeln!(w, "5")?;
    }
    writeln!(w, "POINT_DATA {}", mesh.n_vertices())?;
    writeln!(w, "SCALARS u double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for v in &u[..mesh.n_vertices()] {
        writeln!(w, "{v:.9e}")?;
    }
    w.flush()
}

/// Exterior field on a sampling grid. `valid` marks points far enough from
/// the obstacle to be evaluated; the others carry zero.
pub fn write_vtk_exterior(path: &Path, sampling: &Sampling, values: &[f64], valid: &[bool], title: &str) -> io::Result<()> {
    let mut w = create(path)?;
    let h = sampling.spacing();
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{title}")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET STRUCTURED_POINTS")?;
    writeln!(w, "DIMENSIONS {} {} 1", sampling.n[0], sampling.n[1])?;
    writeln!(w, "ORIGIN {} {} 0", sampling.x[0], sampling.y[0])?;
    writeln!(w, "SPACING {} {} 1", h[0], h[1])?;
    writeln!(w, "POINT_DATA {}", values.len())?;
    writeln!(w, "SCALARS u_scattered double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for v in values {
        writeln!(w, "{v:.9e}")?;
    }
    writeln!(w, "SCALARS valid int 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for &b in valid {
        writeln!(w, "{}", b as i32)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_snapshot_has_consistent_sections() {
        let mesh = wavecouple::mesh::generate_square_mesh(0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.vtk");
        let u: Vec<f64> = (0..mesh.n_vertices()).map(|i| i as f64).collect();
        write_vtk_interior(&path, &mesh, &u, "test").unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# vtk DataFile Version 3.0");
        assert!(text.contains(&format!("POINTS {} double", mesh.n_vertices())));
        assert!(text.contains(&format!("CELLS {} {}", mesh.n_triangles(), 4 * mesh.n_triangles())));
        assert!(text.contains(&format!("POINT_DATA {}", mesh.n_vertices())));
        let data = text.split("LOOKUP_TABLE default\n").nth(1).unwrap();
        assert_eq!(data.lines().count(), mesh.n_vertices());
    }

    #[test]
    fn observation_csv_has_one_row_per_step() {
        let grid = TimeGrid::new(0.5, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("obs.csv");
        write_observations(&path, &grid, &vec![vec![0.0, 1.0]; 4]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "step,t,u_0,u_1");
        assert_eq!(lines.len(), 5);
        assert!(lines[3].starts_with("2,1.000000e0,"));
    }
}
