//! Plain-text mesh files:
//!
//! ```text
//! vertices N
//! x y            (N lines)
//! triangles M
//! i j k c        (M lines, 0-based vertex indices and component id)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use super::Mesh;
use crate::{Error, Result};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    read_mesh(BufReader::new(file), path)
}

/// Parses a mesh from `reader`; `path` is only used in error messages.
pub fn read_mesh(reader: impl BufRead, path: &Path) -> Result<Mesh> {
    let err = |line: usize, message: String| Error::MeshParse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        lines.push((i + 1, trimmed.to_string()));
    }
    let mut it = lines.into_iter();
    let header = |it: &mut std::vec::IntoIter<(usize, String)>, key: &str| -> Result<usize> {
        let (ln, line) = it
            .next()
            .ok_or_else(|| err(0, format!("missing `{key}` header")))?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(key) {
            return Err(err(ln, format!("expected `{key} <count>`, found `{line}`")));
        }
        let n = parts
            .next()
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| err(ln, format!("bad count in `{line}`")))?;
        if parts.next().is_some() {
            return Err(err(ln, format!("trailing tokens in `{line}`")));
        }
        Ok(n)
    };
    let nv = header(&mut it, "vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, line) = it.next().ok_or_else(|| err(0, "file ends inside vertex list".into()))?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| err(ln, format!("bad coordinate: {e}")))?;
        if vals.len() != 2 || !vals.iter().all(|v| v.is_finite()) {
            return Err(err(ln, format!("expected two finite coordinates, found `{line}`")));
        }
        vertices.push([vals[0], vals[1]]);
    }
    let nt = header(&mut it, "triangles")?;
    let mut triangles = Vec::with_capacity(nt);
    let mut components = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (ln, line) = it.next().ok_or_else(|| err(0, "file ends inside triangle list".into()))?;
        let vals: Vec<usize> = line
            .split_whitespace()
            .map(|s| s.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| err(ln, format!("bad index: {e}")))?;
        if vals.len() != 4 {
            return Err(err(ln, format!("expected `i j k c`, found `{line}`")));
        }
        if vals[..3].iter().any(|&v| v >= nv) {
            return Err(err(ln, format!("vertex index out of range in `{line}`")));
        }
        triangles.push([vals[0], vals[1], vals[2]]);
        components.push(vals[3]);
    }
    if let Some((ln, line)) = it.next() {
        return Err(err(ln, format!("unexpected content after triangle list: `{line}`")));
    }
    Mesh::new(vertices, triangles, components)
}

pub fn write_mesh(mut w: impl Write, mesh: &Mesh) -> Result<()> {
    writeln!(w, "vertices {}", mesh.n_vertices())?;
    for v in mesh.vertices() {
        writeln!(w, "{} {}", v[0], v[1])?;
    }
    writeln!(w, "triangles {}", mesh.n_triangles())?;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        writeln!(w, "{} {} {} {}", tri[0], tri[1], tri[2], mesh.components()[t])?;
    }
    Ok(())
}

pub fn save_mesh(path: impl AsRef<Path>, mesh: &Mesh) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_mesh(&mut w, mesh)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_square_mesh;

    fn parse(text: &str) -> Result<Mesh> {
        read_mesh(text.as_bytes(), Path::new("test.mesh"))
    }

    #[test]
    fn round_trip_is_exact() {
        let m = generate_square_mesh(1);
        let mut buf = Vec::new();
        write_mesh(&mut buf, &m).unwrap();
        let back = read_mesh(buf.as_slice(), Path::new("mem")).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn flipped_triangle_is_an_orientation_error() {
        let text = "vertices 3\n0 0\n1 0\n0 1\ntriangles 1\n0 2 1 0\n";
        let e = parse(text).unwrap_err();
        assert!(matches!(e, Error::InvalidMesh(_)) && e.to_string().contains("signed area"), "{e}");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "vertices 2\n0 0\n1 x\n";
        match parse(text).unwrap_err() {
            Error::MeshParse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn two_squares_give_two_components() {
        let text = "# two unit squares\nvertices 8\n0 0\n1 0\n1 1\n0 1\n3 0\n4 0\n4 1\n3 1\n\
                    triangles 4\n0 1 2 0\n0 2 3 0\n4 5 6 1\n4 6 7 1\n";
        let m = parse(text).unwrap();
        assert_eq!(m.n_components(), 2);
    }
}
